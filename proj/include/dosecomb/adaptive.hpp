#pragma once

#include <vector>

#include "dosecomb/rng.hpp"
#include "dosecomb/types.hpp"

namespace dosecomb {

struct RandomisationState {
  int period_index = 1;              // 1-based
  std::vector<double> active_probs;  // r_{i,j}, sums to 1
  std::vector<bool> dropped;         // true when r was zeroed this period
};

struct PeriodAllocation {
  int comparator_n = 0;
  std::vector<int> arm_ns;
  int period_n = 0;
};

// Uniform 1/n_arms start; every arm shares the same prior.
std::vector<double> initial_probs(int n_arms);

// Zero entries <= gamma (boundary inclusive) and renormalise the rest. The
// largest entry of a probability vector over k arms is >= 1/k >= gamma, so
// at least one arm always survives.
std::vector<double> apply_drop_rule(const std::vector<double>& raw_probs, double gamma);

// Two-stage randomisation: each participant draws an arm from probs, then is
// active with probability 1 - r0; inactive participants receive the
// comparator. Arm totals are Binomial(count-of-arm-draws, 1 - r0).
PeriodAllocation allocate_period(int period_n, const std::vector<double>& probs,
                                 double r0, RngStream& rng);

// Diagnostic: true for any arm zeroed in some period and non-zero later.
std::vector<bool> reinstatement_check(const std::vector<RandomisationState>& history);

}  // namespace dosecomb
