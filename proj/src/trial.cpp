#include "dosecomb/trial.hpp"

#include <algorithm>
#include <stdexcept>

namespace dosecomb {

const char* to_string(Decision d) {
  switch (d) {
    case Decision::NonInferior: return "non_inferior";
    case Decision::Inconclusive: return "inconclusive";
    case Decision::ComparatorSuperior: return "comparator_superior";
  }
  return "?";
}

std::vector<int> TrialResult::arm_totals() const {
  std::vector<int> totals(final_counts.arm_counts.size(), 0);
  for (const auto& alloc : allocations)
    for (std::size_t i = 0; i < totals.size(); ++i) totals[i] += alloc.arm_ns[i];
  return totals;
}

std::array<int, 3> generate_arm_outcomes(const ArmTruth& truth, int n, RngStream& rng) {
  if (n < 0) throw std::invalid_argument("generate_arm_outcomes: negative count");
  return rng.multinomial3(n, truth.p_under, truth.p_adequate);
}

int generate_comparator_outcomes(double p_success, int n, RngStream& rng) {
  if (n < 0) throw std::invalid_argument("generate_comparator_outcomes: negative count");
  return rng.binomial(n, p_success);
}

int select_optimal(const PosteriorDraws& draws) {
  if (draws.meta.n_draws < 1)
    throw std::invalid_argument("select_optimal: need at least one draw");
  int best = 0;
  double best_mean = -1.0;
  for (int arm = 0; arm < draws.n_arms; ++arm) {
    double sum = 0.0;
    for (int d = 0; d < draws.meta.n_draws; ++d) sum += draws.arm_prob(d, arm).p_adequate;
    const double mean = sum / draws.meta.n_draws;
    if (mean > best_mean) {
      best_mean = mean;
      best = arm;
    }
  }
  return best;
}

Decision decide(double y, double lambda1, double lambda2) {
  if (!(lambda1 + lambda2 < 1.0))
    throw std::invalid_argument("decide: lambda1 + lambda2 must be < 1");
  if (y <= lambda1) return Decision::NonInferior;
  if (y >= lambda2) return Decision::ComparatorSuperior;
  return Decision::Inconclusive;
}

std::vector<double> interim_probs(const OutcomeTable& counts, const PriorSet& priors,
                                  double gamma, std::vector<double>* raw_out) {
  std::vector<BetaPrior> posteriors;
  posteriors.reserve(counts.arm_counts.size());
  for (const auto& c : counts.arm_counts) {
    const int adequate = c[1];
    const int inadequate = c[0] + c[2];
    posteriors.push_back(beta_posterior(priors.interim_arm, adequate, inadequate));
  }
  const auto raw = prob_best_beta(posteriors);
  if (raw_out) *raw_out = raw;
  return apply_drop_rule(raw, gamma);
}

EnrolmentResult simulate_enrolment(const TrialDesign& design, const Scenario& scenario,
                                   RngStream& rng) {
  const int n_arms = static_cast<int>(design.doses.size());
  if (static_cast<int>(scenario.arm_truths.size()) != n_arms)
    throw std::invalid_argument("simulate_enrolment: scenario arms must match design");

  EnrolmentResult result;
  result.counts.arm_counts.assign(n_arms, {0, 0, 0});

  std::vector<double> probs = initial_probs(n_arms);
  result.rand_history.push_back({1, probs, std::vector<bool>(n_arms, false)});

  const auto period_sizes = design.schedule.period_sizes();
  const int n_periods = static_cast<int>(period_sizes.size());
  for (int j = 0; j < n_periods; ++j) {
    auto alloc = allocate_period(period_sizes[j], probs, design.comparator_fraction, rng);
    for (int i = 0; i < n_arms; ++i) {
      const auto outcome = generate_arm_outcomes(scenario.arm_truths[i], alloc.arm_ns[i], rng);
      for (int k = 0; k < 3; ++k) result.counts.arm_counts[i][k] += outcome[k];
    }
    const int succ =
        generate_comparator_outcomes(scenario.p_comparator, alloc.comparator_n, rng);
    result.counts.comparator_successes += succ;
    result.counts.comparator_failures += alloc.comparator_n - succ;
    result.allocations.push_back(std::move(alloc));

    if (j + 1 < n_periods) {
      std::vector<double> raw;
      probs = interim_probs(result.counts, design.priors, design.drop_threshold, &raw);
      std::vector<bool> dropped(n_arms, false);
      for (int i = 0; i < n_arms; ++i) dropped[i] = (probs[i] == 0.0 && raw[i] > 0.0);
      result.rand_history.push_back({j + 2, probs, std::move(dropped)});
    }
  }
  return result;
}

TrialResult simulate_trial(const TrialDesign& design, const Scenario& scenario,
                           RngStream& rng) {
  auto enrolment = simulate_enrolment(design, scenario, rng);

  TrialResult result;
  result.allocations = std::move(enrolment.allocations);
  result.rand_history = std::move(enrolment.rand_history);
  result.final_counts = std::move(enrolment.counts);

  // Final analysis: all accumulated data enter the dose-response fit,
  // including arms dropped from randomisation in some periods.
  const auto fit = sample_dose_response(result.final_counts, design.doses,
                                        design.priors, design.sampler, rng);
  result.selected_arm = select_optimal(fit);

  const BetaPrior comp_post =
      beta_posterior(design.priors.comparator, result.final_counts.comparator_successes,
                     result.final_counts.comparator_failures);
  std::vector<double> comparator_draws(fit.meta.n_draws);
  for (auto& v : comparator_draws) v = rng.beta(comp_post.alpha, comp_post.beta);

  const auto novel_draws = fit.adequate_draws(result.selected_arm);
  result.y_stat = noninferiority_stat(comparator_draws, novel_draws, design.ni_margin);
  result.decision = decide(result.y_stat, design.lambda1, design.lambda2);

  result.posterior_summary.arm_mean_adequate.assign(fit.n_arms, 0.0);
  for (int arm = 0; arm < fit.n_arms; ++arm) {
    double sum = 0.0;
    for (int d = 0; d < fit.meta.n_draws; ++d) sum += fit.arm_prob(d, arm).p_adequate;
    result.posterior_summary.arm_mean_adequate[arm] = sum / fit.meta.n_draws;
  }
  double comp_sum = 0.0;
  for (double v : comparator_draws) comp_sum += v;
  result.posterior_summary.comparator_mean = comp_sum / comparator_draws.size();

  std::vector<double> diff(comparator_draws.size());
  for (std::size_t i = 0; i < diff.size(); ++i)
    diff[i] = comparator_draws[i] - novel_draws[i];
  result.posterior_summary.difference_hpd = hpd_interval(std::move(diff), 0.95);

  return result;
}

}  // namespace dosecomb
