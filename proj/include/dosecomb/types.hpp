#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dosecomb {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SamplerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One arm's pair of drug doses. Both enter the model through their logarithm.
struct DoseCombination {
  double ketamine_dose = 0.0;        // mg/kg
  double dexmedetomidine_dose = 0.0; // mcg/kg
  std::string label;
};

// A point on the 3-outcome probability simplex (under / adequate / over).
struct ArmTruth {
  double p_under = 0.0;
  double p_adequate = 0.0;
  double p_over = 0.0;
};

struct Scenario {
  std::vector<ArmTruth> arm_truths; // one per dose combination, design order
  double p_comparator = 0.0;
  std::string description;
};

struct BetaPrior {
  double alpha = 1.0;
  double beta = 1.0;
  double mean() const { return alpha / (alpha + beta); }
};

struct CoefficientPrior {
  double location = 0.0;
  double scale = 1.0;
  double degrees_of_freedom = 1.0;
};

struct PriorSet {
  BetaPrior comparator;
  BetaPrior novel_direct;
  BetaPrior interim_arm;
  CoefficientPrior under_intercept, under_slope_a, under_slope_b;
  CoefficientPrior over_intercept, over_slope_a, over_slope_b;
};

struct InterimSchedule {
  std::vector<int> analysis_points; // cumulative enrolment at each interim
  int total_n = 0;

  int n_periods() const { return static_cast<int>(analysis_points.size()) + 1; }

  std::vector<int> period_sizes() const {
    std::vector<int> sizes;
    int prev = 0;
    for (int a : analysis_points) {
      sizes.push_back(a - prev);
      prev = a;
    }
    sizes.push_back(total_n - prev);
    return sizes;
  }
};

struct SamplerConfig {
  int n_draws = 2000;
  int n_burnin = 2000;
  int n_chains = 1;
  double proposal_scale = 0.5;
  bool adapt = true;
  std::uint64_t seed = 0;
};

struct TrialDesign {
  std::vector<DoseCombination> doses;
  double comparator_fraction = 0.4; // R0; R1 = 1 - R0 receives a combination
  double drop_threshold = 0.05;     // gamma
  double ni_margin = 0.178;         // eta
  double lambda1 = 0.037;
  double lambda2 = 0.608;
  InterimSchedule schedule;
  PriorSet priors;
  SamplerConfig sampler;
};

// Sufficient statistics only; no per-patient records.
struct OutcomeTable {
  std::vector<std::array<int, 3>> arm_counts; // per arm: under, adequate, over
  int comparator_successes = 0;
  int comparator_failures = 0;

  int arm_total(int arm) const {
    const auto& c = arm_counts[arm];
    return c[0] + c[1] + c[2];
  }
};

// Throws ValidationError naming the first violated invariant.
const TrialDesign& validate_design(const TrialDesign& design);

PriorSet default_priors();

// The reference design: three dose combinations (2-4, 3-3, 4-2), N = 410,
// interims at 150..350, R0 = 0.4, gamma = 0.05, eta = 0.178.
TrialDesign default_design();

// under/over split of the inadequately sedated, given the fraction of those
// who are over-sedated.
ArmTruth arm_truth_from_adequate(double p_adequate, double over_fraction);

// Fraction of the inadequately sedated who are over-sedated, per arm in
// design order (2-4, 3-3, 4-2).
std::array<double, 3> default_over_fractions();

// Operating-characteristic scenarios 1..8: p_C = 0.97 and the optimal arm
// (3-3) at decreasing effectiveness, 4-2 at -0.05 and 2-4 at -0.10.
Scenario oc_scenario(int number);

// The scenario family used to calibrate the decision thresholds: same arm
// layout as the OC scenarios for a given optimal-arm effectiveness.
Scenario threshold_scenario(double p_optimal);

}  // namespace dosecomb
