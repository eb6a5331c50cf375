#include "dosecomb/calibration.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "dosecomb/inference.hpp"

namespace dosecomb {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= n) return;
      fn(k);
    }
  };
  std::vector<std::thread> pool;
  const int t = std::min<std::size_t>(threads, n);
  pool.reserve(t);
  for (int i = 0; i < t; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

AlcConfig AlcConfig::defaults() {
  AlcConfig cfg;
  for (int n = 350; n <= 500; n += 10) cfg.n_grid.push_back(n);
  return cfg;
}

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (static_cast<double>(v.size()) - 1.0) /
                   static_cast<double>(v.size()));
}

// order statistic at index ceil(q * n) of the sorted values (1-based)
double empirical_quantile(const std::vector<double>& sorted, double q) {
  const std::size_t n = sorted.size();
  std::size_t idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  if (idx < 1) idx = 1;
  if (idx > n) idx = n;
  return sorted[idx - 1];
}

}  // namespace

AlcResult alc_search(const AlcConfig& cfg, const PriorSet& priors, std::uint64_t seed,
                     int threads) {
  if (!(cfg.zeta > 0.0)) throw ValidationError("alc: zeta must be positive");
  if (cfg.n_grid.empty() || cfg.r0_grid.empty())
    throw ValidationError("alc: grids must be non-empty");
  if (!std::is_sorted(cfg.n_grid.begin(), cfg.n_grid.end()) ||
      !std::is_sorted(cfg.r0_grid.begin(), cfg.r0_grid.end()))
    throw ValidationError("alc: grids must be sorted");

  const RngStream root(seed);
  AlcResult result;
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    const int n = cfg.n_grid[ni];
    const RngStream n_root = root.child(ni);
    for (double r0 : cfg.r0_grid) {
      const int n_comp = static_cast<int>(std::lround(n * r0));
      const int n_novel =
          static_cast<int>(std::lround(cfg.novel_share * (n - n_comp)));
      std::vector<double> lengths(cfg.replicates);
      parallel_for(cfg.replicates, threads, [&](std::size_t rep) {
        // Common random numbers across the r0 grid: the streams depend on
        // (seed, n, rep) only, so every r0 sees the same prior draws and the
        // same underlying outcome sequence. The tiny length differences
        // between r0 values are then resolvable at modest replicate counts.
        const RngStream rep_root = n_root.child(rep);
        RngStream prior_rng = rep_root.child(0);
        const double p_comp =
            prior_rng.beta(priors.comparator.alpha, priors.comparator.beta);
        const double p_novel =
            prior_rng.beta(priors.novel_direct.alpha, priors.novel_direct.beta);
        RngStream comp_rng = rep_root.child(1);
        int x_comp = 0;
        for (int i = 0; i < n_comp; ++i) x_comp += comp_rng.bernoulli(p_comp);
        RngStream novel_rng = rep_root.child(2);
        int x_novel = 0;
        for (int i = 0; i < n_novel; ++i) x_novel += novel_rng.bernoulli(p_novel);
        const BetaPrior post_c = beta_posterior(priors.comparator, x_comp, n_comp - x_comp);
        const BetaPrior post_d =
            beta_posterior(priors.novel_direct, x_novel, n_novel - x_novel);
        RngStream post_rng = rep_root.child(3);
        std::vector<double> diff(cfg.posterior_draws);
        for (auto& d : diff)
          d = post_rng.beta(post_c.alpha, post_c.beta) -
              post_rng.beta(post_d.alpha, post_d.beta);
        const auto interval = hpd_interval(std::move(diff), 0.95);
        lengths[rep] = interval.high - interval.low;
      });
      AlcCell cell;
      cell.n = n;
      cell.r0 = r0;
      cell.avg_hpd_length = mean_of(lengths);
      cell.mc_stderr = stderr_of(lengths, cell.avg_hpd_length);
      result.cells.push_back(cell);
    }
  }

  // smallest N whose best R0 meets zeta; among qualifying R0 at that N, the
  // value closest to a balanced trial
  for (int n : cfg.n_grid) {
    std::vector<const AlcCell*> qualifying;
    for (const auto& cell : result.cells)
      if (cell.n == n && cell.avg_hpd_length <= cfg.zeta) qualifying.push_back(&cell);
    if (qualifying.empty()) continue;
    const auto* best = *std::min_element(
        qualifying.begin(), qualifying.end(), [](const AlcCell* a, const AlcCell* b) {
          return std::abs(a->r0 - 0.5) < std::abs(b->r0 - 0.5);
        });
    result.qualified = true;
    result.selected_n = n;
    result.selected_r0 = best->r0;
    break;
  }
  return result;
}

std::vector<double> default_gamma_grid() { return {0.05, 0.10, 0.15, 0.20, 0.25, 0.30}; }

GammaResult gamma_search(const TrialDesign& design_template,
                         const std::vector<double>& gamma_grid, const Scenario& scenario,
                         int replicates, std::uint64_t seed, int threads) {
  int best_arm = 0;
  for (std::size_t i = 1; i < scenario.arm_truths.size(); ++i)
    if (scenario.arm_truths[i].p_adequate >
        scenario.arm_truths[best_arm].p_adequate)
      best_arm = static_cast<int>(i);

  const RngStream root(seed);
  GammaResult result;
  for (std::size_t g = 0; g < gamma_grid.size(); ++g) {
    TrialDesign design = design_template;
    design.drop_threshold = gamma_grid[g];
    validate_design(design);

    std::vector<char> win(replicates, 0);
    std::vector<double> optimal_n(replicates, 0.0);
    const RngStream grid_root = root.child(g);
    parallel_for(replicates, threads, [&](std::size_t rep) {
      RngStream rng = grid_root.child(rep);
      const auto enrolment = simulate_enrolment(design, scenario, rng);
      std::vector<int> totals(design.doses.size(), 0);
      for (const auto& alloc : enrolment.allocations)
        for (std::size_t i = 0; i < totals.size(); ++i) totals[i] += alloc.arm_ns[i];
      const int mx = *std::max_element(totals.begin(), totals.end());
      const int n_at_max = static_cast<int>(std::count(totals.begin(), totals.end(), mx));
      win[rep] = (totals[best_arm] == mx && n_at_max == 1) ? 1 : 0;
      optimal_n[rep] = totals[best_arm];
    });

    GammaCell cell;
    cell.gamma = gamma_grid[g];
    double wins = 0.0;
    for (char w : win) wins += w;
    cell.plurality_prob = wins / replicates;
    cell.mc_stderr =
        std::sqrt(cell.plurality_prob * (1.0 - cell.plurality_prob) / replicates);
    cell.mean_optimal_n = mean_of(optimal_n);
    std::sort(optimal_n.begin(), optimal_n.end());
    cell.optimal_n_q025 = empirical_quantile(optimal_n, 0.025);
    cell.optimal_n_q975 = empirical_quantile(optimal_n, 0.975);
    result.cells.push_back(cell);
  }

  // smallest gamma attaining the maximum probability, at the 2-decimal
  // resolution used for reporting
  double best_prob = -1.0;
  for (const auto& cell : result.cells)
    best_prob = std::max(best_prob, std::round(cell.plurality_prob * 100.0));
  for (const auto& cell : result.cells) {
    if (std::round(cell.plurality_prob * 100.0) == best_prob) {
      result.selected_gamma = cell.gamma;
      break;
    }
  }
  return result;
}

namespace {

LambdaResult calibrate_lambda(const TrialDesign& design_template, double p_optimal,
                              double quantile, int replicates, std::uint64_t seed,
                              int threads) {
  const Scenario scenario = threshold_scenario(p_optimal);
  const RngStream root(seed);
  std::vector<double> ys(replicates);
  parallel_for(replicates, threads, [&](std::size_t rep) {
    RngStream rng = root.child(rep);
    ys[rep] = simulate_trial(design_template, scenario, rng).y_stat;
  });
  std::sort(ys.begin(), ys.end());
  LambdaResult result;
  result.lambda = empirical_quantile(ys, quantile);
  result.y_values = std::move(ys);
  return result;
}

}  // namespace

LambdaResult calibrate_lambda1(const TrialDesign& design_template, int replicates,
                               std::uint64_t seed, int threads) {
  // null: optimal arm exactly at the boundary p_C - eta
  const double p_null = 0.97 - design_template.ni_margin;
  return calibrate_lambda(design_template, p_null, 0.05, replicates, seed, threads);
}

LambdaResult calibrate_lambda2(const TrialDesign& design_template, int replicates,
                               std::uint64_t seed, int threads) {
  return calibrate_lambda(design_template, 0.78, 0.5, replicates, seed, threads);
}

std::vector<OcRow> operating_characteristics(const TrialDesign& design,
                                             const std::vector<Scenario>& scenarios,
                                             int replicates, std::uint64_t seed,
                                             int threads) {
  validate_design(design);
  const RngStream root(seed);
  std::vector<OcRow> rows;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const Scenario& scenario = scenarios[s];
    int best_arm = 0;
    for (std::size_t i = 1; i < scenario.arm_truths.size(); ++i)
      if (scenario.arm_truths[i].p_adequate >
          scenario.arm_truths[best_arm].p_adequate)
        best_arm = static_cast<int>(i);
    const double boundary = scenario.p_comparator - design.ni_margin;
    int n_noninferior_arms = 0;
    for (const auto& t : scenario.arm_truths)
      n_noninferior_arms += (t.p_adequate > boundary);

    std::vector<char> outcome(replicates);
    std::vector<char> joint(replicates, 0);
    const RngStream scen_root = root.child(s);
    parallel_for(replicates, threads, [&](std::size_t rep) {
      RngStream rng = scen_root.child(rep);
      const auto trial = simulate_trial(design, scenario, rng);
      outcome[rep] = static_cast<char>(trial.decision);
      joint[rep] =
          (trial.decision == Decision::NonInferior && trial.selected_arm == best_arm);
    });

    OcRow row;
    row.scenario_id = scenario.description;
    double ni = 0.0, inc = 0.0, sup = 0.0, jnt = 0.0;
    for (int rep = 0; rep < replicates; ++rep) {
      ni += (outcome[rep] == static_cast<char>(Decision::NonInferior));
      inc += (outcome[rep] == static_cast<char>(Decision::Inconclusive));
      sup += (outcome[rep] == static_cast<char>(Decision::ComparatorSuperior));
      jnt += joint[rep];
    }
    const double n = replicates;
    row.p_noninferior = ni / n;
    row.p_inconclusive = inc / n;
    row.p_superior = sup / n;
    row.p_noninferior_and_correct = jnt / n;
    auto se = [n](double p) { return std::sqrt(p * (1.0 - p) / n); };
    row.se_noninferior = se(row.p_noninferior);
    row.se_inconclusive = se(row.p_inconclusive);
    row.se_superior = se(row.p_superior);
    row.se_noninferior_and_correct = se(row.p_noninferior_and_correct);
    row.joint_reported = n_noninferior_arms > 0;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RrScenario> default_rr_scenarios() {
  // per arm, design order (2-4, 3-3, 4-2)
  return {
      {"A", {0.95, 1.00, 0.90}, {0.2, 0.1, 0.01}},
      {"B", {0.98, 1.00, 0.95}, {0.2, 0.1, 0.01}},
      {"C", {1.00, 1.05, 0.95}, {0.2, 0.1, 0.01}},
  };
}

std::vector<PowerRow> predictive_power(const TrialDesign& design,
                                       const std::vector<RrScenario>& rr_scenarios,
                                       int replicates, std::uint64_t seed, int threads) {
  validate_design(design);
  const RngStream root(seed);
  std::vector<PowerRow> rows;
  for (std::size_t s = 0; s < rr_scenarios.size(); ++s) {
    const RrScenario& rr = rr_scenarios[s];
    if (rr.relative_risks.size() != design.doses.size() ||
        rr.over_fractions.size() != design.doses.size())
      throw ValidationError("predictive_power: scenario arms must match design");

    std::vector<char> outcome(replicates);
    const RngStream scen_root = root.child(s);
    parallel_for(replicates, threads, [&](std::size_t rep) {
      RngStream rng = scen_root.child(rep);
      Scenario scenario;
      scenario.p_comparator =
          rng.beta(design.priors.comparator.alpha, design.priors.comparator.beta);
      const double p_novel =
          rng.beta(design.priors.novel_direct.alpha, design.priors.novel_direct.beta);
      for (std::size_t i = 0; i < design.doses.size(); ++i) {
        const double p = std::clamp(rr.relative_risks[i] * p_novel, 0.0, 1.0);
        scenario.arm_truths.push_back(arm_truth_from_adequate(p, rr.over_fractions[i]));
      }
      outcome[rep] = static_cast<char>(simulate_trial(design, scenario, rng).decision);
    });

    PowerRow row;
    row.label = rr.label;
    double inc = 0.0, ni = 0.0;
    for (int rep = 0; rep < replicates; ++rep) {
      inc += (outcome[rep] == static_cast<char>(Decision::Inconclusive));
      ni += (outcome[rep] == static_cast<char>(Decision::NonInferior));
    }
    const double n = replicates;
    row.p_conclusive = 1.0 - inc / n;
    row.p_noninferior = ni / n;
    row.se_conclusive = std::sqrt(row.p_conclusive * (1.0 - row.p_conclusive) / n);
    row.se_noninferior = std::sqrt(row.p_noninferior * (1.0 - row.p_noninferior) / n);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace dosecomb
