#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "dosecomb/rng.hpp"
#include "dosecomb/types.hpp"

namespace dosecomb {

// Regression coefficients of the two logit models: (b0, b1, b2) for
// under-sedation, (ba, bb, bc) for over-sedation.
struct BetaVector {
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  double ba = 0.0, bb = 0.0, bc = 0.0;

  std::array<double, 6> as_array() const { return {b0, b1, b2, ba, bb, bc}; }
  static BetaVector from_array(const std::array<double, 6>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5]};
  }
};

struct DrawsMeta {
  int n_draws = 0;
  int n_chains = 0;
  double acceptance_rate = 0.0;
};

struct PosteriorDraws {
  std::vector<BetaVector> betas;       // one per retained draw
  std::vector<ArmTruth> arm_probs;     // draw-major, n_arms per draw
  std::vector<double> comparator_probs; // filled by the trial layer
  int n_arms = 0;
  DrawsMeta meta;

  const ArmTruth& arm_prob(int draw, int arm) const {
    return arm_probs[static_cast<std::size_t>(draw) * n_arms + arm];
  }

  std::vector<double> adequate_draws(int arm) const;

  // Hard check of the simplex invariant on every stored draw.
  bool simplex_ok(double tol = 1e-12) const;
};

struct Interval {
  double low = 0.0;
  double high = 0.0;
  double mass = 0.0;
};

double expit(double x);

// p_under/p_over from the two logit regressions at a dose; empty when the
// implied 3-vector leaves the simplex (p_under + p_over >= 1).
std::optional<ArmTruth> try_dose_response_probs(const BetaVector& beta,
                                                const DoseCombination& dose);

// Throwing wrapper around try_dose_response_probs.
ArmTruth dose_response_probs(const BetaVector& beta, const DoseCombination& dose);

// sum_k counts_k * ln(probs_k), normalising constant omitted.
double multinomial_loglik(const std::array<int, 3>& counts, const ArmTruth& probs);

BetaPrior beta_posterior(const BetaPrior& prior, int successes, int failures);

// Fraction of draws in which each arm attains the maximum; exact ties within
// a draw split their mass equally.
std::vector<double> prob_best(const std::vector<std::vector<double>>& adequate_draws);

// P(arm i has the largest probability) for independent Beta posteriors,
// via Gauss-Legendre quadrature in probability space. Deterministic.
std::vector<double> prob_best_beta(const std::vector<BetaPrior>& posteriors);

// y = fraction of paired draws with (p_C - p_D) >= eta.
double noninferiority_stat(const std::vector<double>& comparator_draws,
                           const std::vector<double>& novel_draws, double eta);

// Shortest contiguous window over the sorted draws containing ceil(mass * n)
// of them; ties broken by the lowest starting index.
Interval hpd_interval(std::vector<double> draws, double mass = 0.95);

struct McmcResult {
  std::vector<std::array<double, 6>> draws;
  double acceptance_rate = 0.0;
};

// Adaptive random-walk Metropolis on the coordinates enabled in free_mask.
// Burn-in first tunes an isotropic step towards ~30% acceptance, then
// estimates the target covariance for the fixed proposal used during
// sampling. Throws SamplerError when no proposal is ever accepted in burn-in.
McmcResult run_rw_metropolis(
    const std::function<double(const std::array<double, 6>&)>& log_target,
    const std::array<double, 6>& init, const std::array<bool, 6>& free_mask,
    int n_draws, int n_burnin, double proposal_scale, bool adapt, RngStream& rng);

// Posterior of the dose-response coefficients under the Student-t priors and
// the multinomial likelihood, truncated to the region where every arm's
// implied 3-vector is strictly inside the simplex.
PosteriorDraws sample_dose_response(const OutcomeTable& data,
                                    const std::vector<DoseCombination>& doses,
                                    const PriorSet& priors, const SamplerConfig& cfg,
                                    RngStream& rng);

}  // namespace dosecomb
