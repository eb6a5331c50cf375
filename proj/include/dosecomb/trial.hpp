#pragma once

#include <array>
#include <vector>

#include "dosecomb/adaptive.hpp"
#include "dosecomb/inference.hpp"
#include "dosecomb/rng.hpp"
#include "dosecomb/types.hpp"

namespace dosecomb {

enum class Decision { NonInferior, Inconclusive, ComparatorSuperior };

const char* to_string(Decision d);

struct PosteriorSummary {
  std::vector<double> arm_mean_adequate; // posterior mean of p^(2) per arm
  double comparator_mean = 0.0;
  Interval difference_hpd;               // 95% HPD of d = p_C - p_D
};

struct TrialResult {
  std::vector<PeriodAllocation> allocations;
  OutcomeTable final_counts;
  std::vector<RandomisationState> rand_history; // one entry per period
  int selected_arm = -1;
  double y_stat = 0.0;
  Decision decision = Decision::Inconclusive;
  PosteriorSummary posterior_summary;

  std::vector<int> arm_totals() const;
};

// Multinomial outcome counts for one dose arm.
std::array<int, 3> generate_arm_outcomes(const ArmTruth& truth, int n, RngStream& rng);

// Binomial success count for the comparator.
int generate_comparator_outcomes(double p_success, int n, RngStream& rng);

// Arm with the largest posterior mean of p_adequate; ties take the lowest index.
int select_optimal(const PosteriorDraws& draws);

// y <= lambda1 -> NonInferior; y >= lambda2 -> ComparatorSuperior; otherwise
// Inconclusive. Boundaries inclusive.
Decision decide(double y, double lambda1, double lambda2);

// Enrolment and interim machinery only (no final dose-response fit); the
// full trial and the drop-threshold calibration share this path.
struct EnrolmentResult {
  std::vector<PeriodAllocation> allocations;
  std::vector<RandomisationState> rand_history;
  OutcomeTable counts;
};

EnrolmentResult simulate_enrolment(const TrialDesign& design, const Scenario& scenario,
                                   RngStream& rng);

// Interim update rule: per-arm conjugate Beta posteriors on adequate vs
// inadequate counts, exact probability-of-best, then the gamma drop rule.
std::vector<double> interim_probs(const OutcomeTable& counts, const PriorSet& priors,
                                  double gamma, std::vector<double>* raw_out = nullptr);

// One complete simulated trial: period-by-period enrolment with interim
// randomisation updates, final dose-response fit on all accumulated data,
// optimal-dose selection and the three-outcome decision.
TrialResult simulate_trial(const TrialDesign& design, const Scenario& scenario,
                           RngStream& rng);

}  // namespace dosecomb
