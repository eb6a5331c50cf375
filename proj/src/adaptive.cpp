#include "dosecomb/adaptive.hpp"

#include <stdexcept>

namespace dosecomb {

std::vector<double> initial_probs(int n_arms) {
  if (n_arms < 2) throw std::invalid_argument("initial_probs: need at least two arms");
  return std::vector<double>(n_arms, 1.0 / n_arms);
}

std::vector<double> apply_drop_rule(const std::vector<double>& raw_probs, double gamma) {
  std::vector<double> out(raw_probs.size(), 0.0);
  double kept = 0.0;
  bool removed_mass = false;
  for (std::size_t i = 0; i < raw_probs.size(); ++i) {
    if (raw_probs[i] > gamma) {
      out[i] = raw_probs[i];
      kept += raw_probs[i];
    } else if (raw_probs[i] > 0.0) {
      removed_mass = true;
    }
  }
  // Renormalising when only zero entries were "dropped" would perturb the
  // kept probabilities by an ulp and break exact idempotence.
  if (!removed_mass) return raw_probs;
  for (auto& p : out) p /= kept;
  return out;
}

PeriodAllocation allocate_period(int period_n, const std::vector<double>& probs,
                                 double r0, RngStream& rng) {
  if (period_n < 0) throw std::invalid_argument("allocate_period: negative period size");
  PeriodAllocation alloc;
  alloc.period_n = period_n;
  alloc.arm_ns.assign(probs.size(), 0);
  const double r1 = 1.0 - r0;
  for (int p = 0; p < period_n; ++p) {
    const int arm = rng.categorical(probs);
    if (rng.bernoulli(r1))
      ++alloc.arm_ns[arm];
    else
      ++alloc.comparator_n; // comparator patients still draw an arm (blinding)
  }
  return alloc;
}

std::vector<bool> reinstatement_check(const std::vector<RandomisationState>& history) {
  if (history.empty())
    throw std::invalid_argument("reinstatement_check: empty history");
  const std::size_t k = history.front().active_probs.size();
  std::vector<bool> out(k, false);
  for (std::size_t arm = 0; arm < k; ++arm) {
    bool seen_zero = false;
    for (const auto& state : history) {
      if (state.active_probs[arm] == 0.0)
        seen_zero = true;
      else if (seen_zero)
        out[arm] = true;
    }
  }
  return out;
}

}  // namespace dosecomb
