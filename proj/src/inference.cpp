#include "dosecomb/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

namespace dosecomb {

double expit(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> PosteriorDraws::adequate_draws(int arm) const {
  std::vector<double> out(meta.n_draws);
  for (int d = 0; d < meta.n_draws; ++d) out[d] = arm_prob(d, arm).p_adequate;
  return out;
}

bool PosteriorDraws::simplex_ok(double tol) const {
  for (const auto& t : arm_probs) {
    if (!(t.p_under > 0.0 && t.p_under < 1.0)) return false;
    if (!(t.p_adequate > 0.0 && t.p_adequate < 1.0)) return false;
    if (!(t.p_over > 0.0 && t.p_over < 1.0)) return false;
    if (std::abs(t.p_under + t.p_adequate + t.p_over - 1.0) > tol) return false;
  }
  return true;
}

std::optional<ArmTruth> try_dose_response_probs(const BetaVector& beta,
                                                const DoseCombination& dose) {
  const double la = std::log(dose.ketamine_dose);
  const double lb = std::log(dose.dexmedetomidine_dose);
  ArmTruth t;
  t.p_under = expit(beta.b0 + beta.b1 * la + beta.b2 * lb);
  t.p_over = expit(beta.ba + beta.bb * la + beta.bc * lb);
  t.p_adequate = 1.0 - t.p_under - t.p_over;
  if (!(t.p_adequate > 0.0)) return std::nullopt;
  return t;
}

ArmTruth dose_response_probs(const BetaVector& beta, const DoseCombination& dose) {
  auto t = try_dose_response_probs(beta, dose);
  if (!t)
    throw std::domain_error(
        "dose_response_probs: p_under + p_over >= 1 (outside the simplex)");
  return *t;
}

double multinomial_loglik(const std::array<int, 3>& counts, const ArmTruth& probs) {
  double ll = 0.0;
  if (counts[0] > 0) ll += counts[0] * std::log(probs.p_under);
  if (counts[1] > 0) ll += counts[1] * std::log(probs.p_adequate);
  if (counts[2] > 0) ll += counts[2] * std::log(probs.p_over);
  return ll;
}

BetaPrior beta_posterior(const BetaPrior& prior, int successes, int failures) {
  if (successes < 0 || failures < 0)
    throw std::invalid_argument("beta_posterior: counts must be non-negative");
  return {prior.alpha + successes, prior.beta + failures};
}

std::vector<double> prob_best(const std::vector<std::vector<double>>& adequate_draws) {
  const std::size_t k = adequate_draws.size();
  if (k < 2) throw std::invalid_argument("prob_best: need at least two arms");
  const std::size_t n = adequate_draws[0].size();
  if (n == 0) throw std::invalid_argument("prob_best: need at least one draw");
  for (const auto& v : adequate_draws)
    if (v.size() != n) throw std::invalid_argument("prob_best: unequal draw counts");

  std::vector<double> wins(k, 0.0);
  for (std::size_t d = 0; d < n; ++d) {
    double best = adequate_draws[0][d];
    for (std::size_t i = 1; i < k; ++i) best = std::max(best, adequate_draws[i][d]);
    int tied = 0;
    for (std::size_t i = 0; i < k; ++i) tied += (adequate_draws[i][d] == best);
    const double share = 1.0 / tied;
    for (std::size_t i = 0; i < k; ++i)
      if (adequate_draws[i][d] == best) wins[i] += share;
  }
  for (auto& w : wins) w /= static_cast<double>(n);
  return wins;
}

namespace {

// 64-point Gauss-Legendre rule on [0, 1], computed once by Newton iteration
// on the Legendre polynomial.
struct GaussLegendre {
  static constexpr int n = 64;
  std::array<double, n> node{};
  std::array<double, n> weight{};

  GaussLegendre() {
    for (int i = 0; i < n / 2 + n % 2; ++i) {
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= n; ++j) {
          const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      node[i] = 0.5 * (1.0 - x);
      weight[i] = 0.5 * w;
      node[n - 1 - i] = 0.5 * (1.0 + x);
      weight[n - 1 - i] = 0.5 * w;
    }
  }
};

const GaussLegendre& gl64() {
  static const GaussLegendre g;
  return g;
}

}  // namespace

std::vector<double> prob_best_beta(const std::vector<BetaPrior>& posteriors) {
  const std::size_t k = posteriors.size();
  if (k < 2) throw std::invalid_argument("prob_best_beta: need at least two arms");
  const auto& gl = gl64();
  std::vector<double> out(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    double acc = 0.0;
    for (int q = 0; q < GaussLegendre::n; ++q) {
      // P(i best) = E_u[ prod_{j != i} F_j(Q_i(u)) ], u uniform on (0,1)
      const double x =
          boost::math::ibeta_inv(posteriors[i].alpha, posteriors[i].beta, gl.node[q]);
      double prod = 1.0;
      for (std::size_t j = 0; j < k; ++j) {
        if (j == i) continue;
        prod *= boost::math::ibeta(posteriors[j].alpha, posteriors[j].beta, x);
      }
      acc += gl.weight[q] * prod;
    }
    out[i] = acc;
  }
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  for (auto& v : out) v /= total;
  return out;
}

double noninferiority_stat(const std::vector<double>& comparator_draws,
                           const std::vector<double>& novel_draws, double eta) {
  if (comparator_draws.size() != novel_draws.size() || comparator_draws.empty())
    throw std::invalid_argument("noninferiority_stat: need equal-length draw vectors");
  std::size_t count = 0;
  for (std::size_t i = 0; i < comparator_draws.size(); ++i)
    count += (comparator_draws[i] - novel_draws[i] >= eta);
  return static_cast<double>(count) / static_cast<double>(comparator_draws.size());
}

Interval hpd_interval(std::vector<double> draws, double mass) {
  const std::size_t n = draws.size();
  if (n < 10) throw std::invalid_argument("hpd_interval: need at least 10 draws");
  if (!(mass > 0.0 && mass < 1.0))
    throw std::invalid_argument("hpd_interval: mass must lie strictly in (0, 1)");
  std::sort(draws.begin(), draws.end());
  const std::size_t m =
      static_cast<std::size_t>(std::ceil(mass * static_cast<double>(n)));
  std::size_t best = 0;
  double best_len = draws[m - 1] - draws[0];
  for (std::size_t i = 1; i + m <= n; ++i) {
    const double len = draws[i + m - 1] - draws[i];
    if (len < best_len) {
      best_len = len;
      best = i;
    }
  }
  return {draws[best], draws[best + m - 1], mass};
}

namespace {

// Lower-triangular Cholesky factor of a d x d matrix stored dense in a 6x6
// buffer; returns false when the matrix is not positive definite.
bool cholesky6(const std::array<std::array<double, 6>, 6>& a, int d,
               std::array<std::array<double, 6>, 6>& l) {
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) l[i][j] = 0.0;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[i][j];
      for (int p = 0; p < j; ++p) s -= l[i][p] * l[j][p];
      if (i == j) {
        if (s <= 0.0) return false;
        l[i][i] = std::sqrt(s);
      } else {
        l[i][j] = s / l[j][j];
      }
    }
  }
  return true;
}

}  // namespace

McmcResult run_rw_metropolis(
    const std::function<double(const std::array<double, 6>&)>& log_target,
    const std::array<double, 6>& init, const std::array<bool, 6>& free_mask,
    int n_draws, int n_burnin, double proposal_scale, bool adapt, RngStream& rng) {
  std::array<int, 6> free_idx{};
  int d = 0;
  for (int i = 0; i < 6; ++i)
    if (free_mask[i]) free_idx[d++] = i;
  if (d == 0) throw std::invalid_argument("run_rw_metropolis: no free coordinates");

  std::array<double, 6> cur = init;
  double cur_lp = log_target(cur);
  if (!std::isfinite(cur_lp))
    throw SamplerError("run_rw_metropolis: initial point has zero posterior density");

  double step = proposal_scale;
  bool use_cov = false;
  std::array<std::array<double, 6>, 6> chol{};

  // covariance accumulators over the second half of burn-in
  std::array<double, 6> mean{};
  std::array<std::array<double, 6>, 6> cov{};
  long cov_n = 0;

  const int adapt_window = 50;
  int window_accepts = 0;
  long burn_accepts = 0;

  auto propose = [&](std::array<double, 6>& prop) {
    prop = cur;
    if (use_cov) {
      std::array<double, 6> z{};
      for (int i = 0; i < d; ++i) z[i] = rng.normal();
      for (int i = 0; i < d; ++i) {
        double delta = 0.0;
        for (int j = 0; j <= i; ++j) delta += chol[i][j] * z[j];
        prop[free_idx[i]] += delta;
      }
    } else {
      for (int i = 0; i < d; ++i) prop[free_idx[i]] += step * rng.normal();
    }
  };

  auto mh_step = [&]() -> bool {
    std::array<double, 6> prop;
    propose(prop);
    const double lp = log_target(prop);
    if (std::isfinite(lp) && std::log(rng.uniform01_open0()) < lp - cur_lp) {
      cur = prop;
      cur_lp = lp;
      return true;
    }
    return false;
  };

  for (int it = 0; it < n_burnin; ++it) {
    const bool accepted = mh_step();
    burn_accepts += accepted;
    window_accepts += accepted;
    if (adapt && (it + 1) % adapt_window == 0) {
      const double rate = static_cast<double>(window_accepts) / adapt_window;
      step *= std::exp(0.7 * (rate - 0.3));
      step = std::clamp(step, 1e-4, 50.0);
      window_accepts = 0;
    }
    if (it >= n_burnin / 2) {
      ++cov_n;
      // Welford update of mean and scatter on the free coordinates
      std::array<double, 6> delta{};
      for (int i = 0; i < d; ++i) {
        const double x = cur[free_idx[i]];
        delta[i] = x - mean[i];
        mean[i] += delta[i] / static_cast<double>(cov_n);
      }
      for (int i = 0; i < d; ++i)
        for (int j = 0; j <= i; ++j)
          cov[i][j] += delta[i] * (cur[free_idx[j]] - mean[j]);
    }
  }
  if (burn_accepts == 0)
    throw SamplerError("run_rw_metropolis: no proposal accepted during burn-in");

  if (adapt && cov_n > 10 * d) {
    std::array<std::array<double, 6>, 6> sigma{};
    const double scale = 5.66 / static_cast<double>(d); // 2.38^2 / d
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j <= i; ++j) {
        double c = cov[i][j] / static_cast<double>(cov_n - 1);
        c *= scale;
        sigma[i][j] = c;
        sigma[j][i] = c;
      }
      sigma[i][i] += 1e-10;
    }
    use_cov = cholesky6(sigma, d, chol);
  }

  McmcResult result;
  result.draws.reserve(n_draws);
  long accepts = 0;
  for (int it = 0; it < n_draws; ++it) {
    accepts += mh_step();
    result.draws.push_back(cur);
  }
  result.acceptance_rate = static_cast<double>(accepts) / std::max(1, n_draws);
  return result;
}

PosteriorDraws sample_dose_response(const OutcomeTable& data,
                                    const std::vector<DoseCombination>& doses,
                                    const PriorSet& priors, const SamplerConfig& cfg,
                                    RngStream& rng) {
  const int n_arms = static_cast<int>(doses.size());
  if (static_cast<int>(data.arm_counts.size()) != n_arms)
    throw std::invalid_argument("sample_dose_response: data arms must align with doses");

  const std::array<CoefficientPrior, 6> coeff_priors = {
      priors.under_intercept, priors.under_slope_a, priors.under_slope_b,
      priors.over_intercept,  priors.over_slope_a,  priors.over_slope_b};

  auto log_t = [](double x, const CoefficientPrior& p) {
    const double z = (x - p.location) / p.scale;
    return -0.5 * (p.degrees_of_freedom + 1.0) *
           std::log1p(z * z / p.degrees_of_freedom);
  };

  auto log_target = [&](const std::array<double, 6>& b) -> double {
    const BetaVector beta = BetaVector::from_array(b);
    double lp = 0.0;
    for (int a = 0; a < n_arms; ++a) {
      const auto probs = try_dose_response_probs(beta, doses[a]);
      if (!probs) return -std::numeric_limits<double>::infinity();
      lp += multinomial_loglik(data.arm_counts[a], *probs);
    }
    for (int i = 0; i < 6; ++i) lp += log_t(b[i], coeff_priors[i]);
    return lp;
  };

  std::array<double, 6> init = {priors.under_intercept.location,
                                priors.under_slope_a.location,
                                priors.under_slope_b.location,
                                priors.over_intercept.location,
                                priors.over_slope_a.location,
                                priors.over_slope_b.location};
  const std::array<bool, 6> all_free = {true, true, true, true, true, true};

  PosteriorDraws out;
  out.n_arms = n_arms;
  out.meta.n_chains = cfg.n_chains;
  out.betas.reserve(cfg.n_draws);
  out.arm_probs.reserve(static_cast<std::size_t>(cfg.n_draws) * n_arms);

  const int base = cfg.n_draws / cfg.n_chains;
  const int extra = cfg.n_draws % cfg.n_chains;
  double acc_sum = 0.0;
  for (int chain = 0; chain < cfg.n_chains; ++chain) {
    RngStream chain_rng = rng.child(0x6368u + chain);
    const int chain_draws = base + (chain < extra ? 1 : 0);
    if (chain_draws == 0) continue;
    auto res = run_rw_metropolis(log_target, init, all_free, chain_draws,
                                 cfg.n_burnin, cfg.proposal_scale, cfg.adapt,
                                 chain_rng);
    acc_sum += res.acceptance_rate * chain_draws;
    for (const auto& b : res.draws) {
      const BetaVector beta = BetaVector::from_array(b);
      out.betas.push_back(beta);
      for (int a = 0; a < n_arms; ++a)
        out.arm_probs.push_back(*try_dose_response_probs(beta, doses[a]));
    }
  }
  out.meta.n_draws = static_cast<int>(out.betas.size());
  out.meta.acceptance_rate = acc_sum / std::max(1, out.meta.n_draws);
  return out;
}

}  // namespace dosecomb
