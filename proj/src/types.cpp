#include "dosecomb/types.hpp"

#include <cmath>
#include <sstream>

namespace dosecomb {

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

[[noreturn]] void fail(const std::string& what) { throw ValidationError(what); }

void check_beta_prior(const BetaPrior& p, const char* name) {
  if (!(p.alpha > 0.0)) fail(std::string(name) + ": alpha must be > 0");
  if (!(p.beta > 0.0)) fail(std::string(name) + ": beta must be > 0");
}

void check_coeff_prior(const CoefficientPrior& p, const char* name) {
  if (!std::isfinite(p.location)) fail(std::string(name) + ": location must be finite");
  if (!(p.scale > 0.0)) fail(std::string(name) + ": scale must be > 0");
  if (!(p.degrees_of_freedom > 0.0))
    fail(std::string(name) + ": degrees_of_freedom must be > 0");
}

}  // namespace

const TrialDesign& validate_design(const TrialDesign& design) {
  const std::size_t k = design.doses.size();
  if (k < 2) fail("doses: at least two dose combinations required");
  for (const auto& d : design.doses) {
    if (!(d.ketamine_dose > 0.0))
      fail("doses: ketamine_dose must be strictly positive (arm " + d.label + ")");
    if (!(d.dexmedetomidine_dose > 0.0))
      fail("doses: dexmedetomidine_dose must be strictly positive (arm " + d.label + ")");
  }
  if (!(design.comparator_fraction > 0.0 && design.comparator_fraction < 1.0))
    fail("comparator_fraction: must lie strictly between 0 and 1");
  if (design.drop_threshold < 0.0 || design.drop_threshold > 1.0 / static_cast<double>(k)) {
    std::ostringstream os;
    os << "drop_threshold: must lie in [0, 1/" << k << "]";
    fail(os.str());
  }
  if (!(design.ni_margin > 0.0 && design.ni_margin < 1.0))
    fail("ni_margin: must lie strictly between 0 and 1");
  if (design.lambda1 < 0.0 || design.lambda1 > 1.0) fail("lambda1: must lie in [0, 1]");
  if (design.lambda2 < 0.0 || design.lambda2 > 1.0) fail("lambda2: must lie in [0, 1]");
  if (!(design.lambda1 + design.lambda2 < 1.0))
    fail("lambda1 + lambda2 must be strictly less than 1");

  const auto& sched = design.schedule;
  if (sched.total_n <= 0) fail("schedule: total_n must be positive");
  int prev = 0;
  for (int a : sched.analysis_points) {
    if (a <= prev) fail("schedule: analysis_points must be strictly increasing and positive");
    prev = a;
  }
  if (!sched.analysis_points.empty() && sched.analysis_points.back() >= sched.total_n)
    fail("schedule: last analysis point must be before total_n");

  check_beta_prior(design.priors.comparator, "priors.comparator");
  check_beta_prior(design.priors.novel_direct, "priors.novel_direct");
  check_beta_prior(design.priors.interim_arm, "priors.interim_arm");
  check_coeff_prior(design.priors.under_intercept, "priors.under_intercept");
  check_coeff_prior(design.priors.under_slope_a, "priors.under_slope_a");
  check_coeff_prior(design.priors.under_slope_b, "priors.under_slope_b");
  check_coeff_prior(design.priors.over_intercept, "priors.over_intercept");
  check_coeff_prior(design.priors.over_slope_a, "priors.over_slope_a");
  check_coeff_prior(design.priors.over_slope_b, "priors.over_slope_b");

  if (design.sampler.n_draws <= 0) fail("sampler: n_draws must be positive");
  if (design.sampler.n_burnin <= 0) fail("sampler: n_burnin must be positive");
  if (design.sampler.n_chains <= 0) fail("sampler: n_chains must be positive");
  if (!(design.sampler.proposal_scale > 0.0)) fail("sampler: proposal_scale must be positive");

  return design;
}

PriorSet default_priors() {
  PriorSet p;
  p.comparator = {15.6, 0.44};
  p.novel_direct = {6.25, 0.25};
  p.interim_arm = {6.25, 0.25};
  const double scale = 1.0 / std::sqrt(0.001); // precision 0.001
  p.under_intercept = {logit(0.05), scale, 1.0};
  p.under_slope_a = {0.0, scale, 1.0};
  p.under_slope_b = {0.0, scale, 1.0};
  p.over_intercept = {logit(0.02), scale, 1.0};
  p.over_slope_a = {0.0, scale, 1.0};
  p.over_slope_b = {0.0, scale, 1.0};
  return p;
}

TrialDesign default_design() {
  TrialDesign d;
  d.doses = {{2.0, 4.0, "2-4"}, {3.0, 3.0, "3-3"}, {4.0, 2.0, "4-2"}};
  d.comparator_fraction = 0.4;
  d.drop_threshold = 0.05;
  d.ni_margin = 0.178;
  d.lambda1 = 0.037;
  d.lambda2 = 0.608;
  d.schedule.analysis_points = {150, 200, 250, 300, 350};
  d.schedule.total_n = 410;
  d.priors = default_priors();
  d.sampler = SamplerConfig{};
  return d;
}

ArmTruth arm_truth_from_adequate(double p_adequate, double over_fraction) {
  const double inadequate = 1.0 - p_adequate;
  ArmTruth t;
  t.p_adequate = p_adequate;
  t.p_over = over_fraction * inadequate;
  t.p_under = inadequate - t.p_over;
  return t;
}

std::array<double, 3> default_over_fractions() { return {0.2, 0.1, 0.01}; }

namespace {

Scenario scenario_from_optimal(double p_optimal, const std::string& description) {
  // arm order (2-4, 3-3, 4-2): optimal is 3-3, 4-2 trails by 0.05, 2-4 by 0.10
  const std::array<double, 3> adequate = {p_optimal - 0.10, p_optimal, p_optimal - 0.05};
  const auto over = default_over_fractions();
  Scenario s;
  for (int i = 0; i < 3; ++i)
    s.arm_truths.push_back(arm_truth_from_adequate(adequate[i], over[i]));
  s.p_comparator = 0.97;
  s.description = description;
  return s;
}

}  // namespace

Scenario oc_scenario(int number) {
  static const std::array<double, 8> p_optimal = {0.93, 0.90, 0.87, 0.85,
                                                  0.83, 0.792, 0.78, 0.75};
  if (number < 1 || number > 8)
    throw ValidationError("oc_scenario: number must lie in 1..8");
  std::ostringstream os;
  os << "scenario " << number << " (optimal arm at " << p_optimal[number - 1] << ")";
  return scenario_from_optimal(p_optimal[number - 1], os.str());
}

Scenario threshold_scenario(double p_optimal) {
  std::ostringstream os;
  os << "threshold calibration (optimal arm at " << p_optimal << ")";
  return scenario_from_optimal(p_optimal, os.str());
}

}  // namespace dosecomb
