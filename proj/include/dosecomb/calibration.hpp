#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dosecomb/trial.hpp"
#include "dosecomb/types.hpp"

namespace dosecomb {

// Runs fn(k) for k in [0, n). Each item must depend only on its index (every
// replicate draws its RNG stream from (root seed, k)), so results are
// identical for any thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

struct AlcConfig {
  double zeta = 0.07;
  std::vector<int> n_grid;          // default 350..500 step 10
  std::vector<double> r0_grid = {0.2, 0.3, 0.4, 0.5};
  int replicates = 2000;
  int posterior_draws = 2000;
  // Share of the active participants contributing to the novel-arm posterior.
  // The comparison concerns a single dose combination, which receives a third
  // of the active allocation under even randomisation.
  double novel_share = 1.0 / 3.0;

  static AlcConfig defaults();
};

struct AlcCell {
  int n = 0;
  double r0 = 0.0;
  double avg_hpd_length = 0.0;
  double mc_stderr = 0.0;
};

struct AlcResult {
  std::vector<AlcCell> cells; // grid order: n-major, r0-minor
  bool qualified = false;     // some grid point met zeta
  int selected_n = 0;
  double selected_r0 = 0.0;
};

// Prior-predictive search over (N, R0): smallest N with an average 95% HPD
// length of d = p_C - p_D below zeta; among qualifying R0 at that N, the one
// closest to a balanced trial.
AlcResult alc_search(const AlcConfig& cfg, const PriorSet& priors, std::uint64_t seed,
                     int threads);

struct GammaCell {
  double gamma = 0.0;
  double plurality_prob = 0.0; // optimal arm got a strict plurality
  double mc_stderr = 0.0;
  double mean_optimal_n = 0.0;
  double optimal_n_q025 = 0.0;
  double optimal_n_q975 = 0.0;
};

struct GammaResult {
  std::vector<GammaCell> cells;
  double selected_gamma = 0.0;
};

std::vector<double> default_gamma_grid();

// For each drop threshold, the probability that the truly best arm receives
// a strict plurality of participants (ties count as failure). Selection:
// smallest gamma attaining the maximum probability, at the 2-decimal
// resolution the replicate count supports.
GammaResult gamma_search(const TrialDesign& design_template,
                         const std::vector<double>& gamma_grid, const Scenario& scenario,
                         int replicates, std::uint64_t seed, int threads);

struct LambdaResult {
  double lambda = 0.0;
  std::vector<double> y_values; // sorted
};

// Empirical 5th percentile of y under the null (optimal arm exactly at the
// non-inferiority boundary), so that P(y <= lambda1) = 0.05.
LambdaResult calibrate_lambda1(const TrialDesign& design_template, int replicates,
                               std::uint64_t seed, int threads);

// Empirical median of y when the optimal arm sits at 0.78, so that
// P(y >= lambda2) = 0.5.
LambdaResult calibrate_lambda2(const TrialDesign& design_template, int replicates,
                               std::uint64_t seed, int threads);

struct OcRow {
  std::string scenario_id;
  double p_noninferior = 0.0;
  double p_inconclusive = 0.0;
  double p_superior = 0.0;
  double p_noninferior_and_correct = 0.0;
  double se_noninferior = 0.0;
  double se_inconclusive = 0.0;
  double se_superior = 0.0;
  double se_noninferior_and_correct = 0.0;
  bool joint_reported = true; // suppressed when no arm is truly non-inferior
};

std::vector<OcRow> operating_characteristics(const TrialDesign& design,
                                             const std::vector<Scenario>& scenarios,
                                             int replicates, std::uint64_t seed,
                                             int threads);

struct RrScenario {
  std::string label;
  std::vector<double> relative_risks;  // per arm, design order
  std::vector<double> over_fractions;  // per arm, design order
};

std::vector<RrScenario> default_rr_scenarios();

struct PowerRow {
  std::string label;
  double p_conclusive = 0.0;
  double p_noninferior = 0.0;
  double se_conclusive = 0.0;
  double se_noninferior = 0.0;
};

// Bayesian predictive power: p_C and p_D drawn from their priors each
// replicate, arm effectiveness scaled by the scenario's relative risks.
std::vector<PowerRow> predictive_power(const TrialDesign& design,
                                       const std::vector<RrScenario>& rr_scenarios,
                                       int replicates, std::uint64_t seed, int threads);

}  // namespace dosecomb
