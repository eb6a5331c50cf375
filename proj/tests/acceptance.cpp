// Acceptance suite: one pass/fail line per criterion, tolerances fixed below.
// Exit code is the number of failed criteria.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/beta.hpp>

#include "dosecomb/calibration.hpp"
#include "dosecomb/io.hpp"
#include "dosecomb/trial.hpp"

using namespace dosecomb;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

// Batch-means effective sample size for an autocorrelated chain.
double effective_sample_size(const std::vector<double>& chain) {
  const std::size_t n = chain.size();
  const std::size_t b = static_cast<std::size_t>(std::sqrt(double(n)));
  const std::size_t m = n / b;
  const double mu = mean_of(chain);
  double var = 0.0;
  for (double x : chain) var += (x - mu) * (x - mu);
  var /= (n - 1);
  double bvar = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    double bm = 0.0;
    for (std::size_t i = 0; i < b; ++i) bm += chain[k * b + i];
    bm /= b;
    bvar += (bm - mu) * (bm - mu);
  }
  bvar = bvar * b / (m - 1);
  if (bvar <= 0.0) return double(n);
  return std::min(double(n), n * var / bvar);
}

double empirical_q(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const std::size_t idx =
      std::min(v.size() - 1, static_cast<std::size_t>(std::ceil(q * v.size())) - 1);
  return v[idx];
}

// ---------------------------------------------------------------------------
// 1. Conjugacy oracle: one arm, slopes frozen at zero and the over-sedation
// intercept frozen far negative, so p_adequate = 1 - expit(b0). A Beta(a, b)
// prior on p_under maps to log-density a*ln(expit) + b*ln(1-expit) on b0; the
// analytic posterior of p_adequate is then Beta(b + n - u, a + u).
void criterion_1() {
  const double a = 0.25, b = 6.25;  // prior on p_under: mean 1 - 0.9615
  const int under = 7, adequate = 93;
  const auto log_target = [&](const std::array<double, 6>& x) {
    const double p = expit(x[0]);
    return (a + under) * std::log(p) + (b + adequate) * std::log1p(-p);
  };
  RngStream rng(314159);
  const std::array<bool, 6> mask{true, false, false, false, false, false};
  const auto res = run_rw_metropolis(log_target, {-2.0, 0, 0, -30.0, 0, 0}, mask, 2000,
                                     2000, 0.5, true, rng);
  std::vector<double> p_adequate;
  p_adequate.reserve(res.draws.size());
  for (const auto& d : res.draws) p_adequate.push_back(1.0 - expit(d[0]));

  const boost::math::beta_distribution<double> post(b + adequate, a + under);
  const double ess = effective_sample_size(p_adequate);
  const double exact_mean = boost::math::mean(post);
  const double exact_sd = std::sqrt(boost::math::variance(post));
  const double mean_se = exact_sd / std::sqrt(ess);
  const double mcmc_mean = mean_of(p_adequate);

  bool pass = std::abs(mcmc_mean - exact_mean) < 3.0 * mean_se;
  std::ostringstream detail;
  detail << "conjugacy oracle: mean " << mcmc_mean << " vs " << exact_mean << " (3se "
         << 3.0 * mean_se << ", ess " << int(ess) << ")";
  for (double q : {0.025, 0.975}) {
    const double exact_q = boost::math::quantile(post, q);
    const double est_q = empirical_q(p_adequate, q);
    const double dens = boost::math::pdf(post, exact_q);
    const double q_se = std::sqrt(q * (1.0 - q) / ess) / dens;
    if (std::abs(est_q - exact_q) >= 3.0 * q_se) {
      pass = false;
      detail << "; q" << q << " " << est_q << " vs " << exact_q << " (3se " << 3.0 * q_se
             << ")";
    }
  }
  report(1, pass, detail.str());
}

// ---------------------------------------------------------------------------
// 2. Drop/decision-rule properties on randomised inputs.
void criterion_2() {
  RngStream rng(271828);
  const int cases = 20000;
  int bad = 0;
  std::string first_bad;
  auto flag = [&](const std::string& what) {
    ++bad;
    if (first_bad.empty()) first_bad = what;
  };

  for (int c = 0; c < cases; ++c) {
    const int k = 2 + static_cast<int>(rng.uniform01() * 4);  // 2..5 arms
    std::vector<double> probs(k);
    double total = 0.0;
    for (double& p : probs) {
      p = rng.gamma(1.0);
      total += p;
    }
    for (double& p : probs) p /= total;
    const double gamma = rng.uniform01() / k;

    const auto dropped = apply_drop_rule(probs, gamma);
    double sum = 0.0;
    for (std::size_t i = 0; i < dropped.size(); ++i) {
      sum += dropped[i];
      if (dropped[i] == 0.0 && probs[i] > gamma) flag("kept arm zeroed");
      if (dropped[i] > 0.0 && probs[i] <= gamma) flag("boundary arm survived");
    }
    if (std::abs(sum - 1.0) > 1e-12) flag("drop-rule sum");
    if (apply_drop_rule(dropped, gamma) != dropped) flag("drop-rule idempotence");

    // decision rule partition and boundary inclusivity
    double l1 = rng.uniform01() * 0.5;
    double l2 = rng.uniform01() * (1.0 - l1 - 1e-9) ;
    if (l1 + l2 >= 1.0) l2 = (1.0 - l1) / 2.0;
    if (l2 <= l1) l2 = l1 + (1.0 - 2.0 * l1) / 2.0;
    const double y = rng.uniform01();
    const Decision d = decide(y, l1, l2);
    const Decision expected = (y <= l1)   ? Decision::NonInferior
                              : (y >= l2) ? Decision::ComparatorSuperior
                                          : Decision::Inconclusive;
    if (d != expected) flag("decision partition");
    if (decide(l1, l1, l2) != Decision::NonInferior) flag("lambda1 boundary");
    if (decide(l2, l1, l2) != Decision::ComparatorSuperior) flag("lambda2 boundary");
  }

  std::ostringstream detail;
  detail << "rule properties: " << cases << " randomised cases, " << bad << " violations";
  if (bad) detail << " (first: " << first_bad << ")";
  report(2, bad == 0, detail.str());
}

// ---------------------------------------------------------------------------
// 3. Drop-threshold table at gamma = 0.05.
void criterion_3() {
  const TrialDesign design = default_design();
  const auto res = gamma_search(design, {0.05}, oc_scenario(1), 2000, 424242, 0);
  const auto& cell = res.cells.front();

  const bool p_ok = std::abs(cell.plurality_prob - 0.83) <= 0.04;
  const bool n_ok = std::abs(cell.mean_optimal_n - 137.0) <= 10.0;
  const bool lo_ok = std::abs(cell.optimal_n_q025 - 56.0) <= 15.0;
  const bool hi_ok = std::abs(cell.optimal_n_q975 - 190.0) <= 15.0;

  std::ostringstream detail;
  detail << "gamma 0.05: plurality " << cell.plurality_prob << " (target 0.83 +/- 0.04), "
         << "mean optimal n " << cell.mean_optimal_n << " (137 +/- 10), interval ["
         << cell.optimal_n_q025 << ", " << cell.optimal_n_q975
         << "] (endpoints within 15 of [56, 190])";
  report(3, p_ok && n_ok && lo_ok && hi_ok, detail.str());
}

// ---------------------------------------------------------------------------
// 4. Lambda calibration plus closed-loop type I error.
void criterion_4() {
  const TrialDesign design = default_design();
  const int calib_reps = 1500;
  const auto l1 = calibrate_lambda1(design, calib_reps, 9101, 0);
  const auto l2 = calibrate_lambda2(design, calib_reps, 9102, 0);
  const bool l1_ok = std::abs(l1.lambda - 0.037) <= 0.02;
  const bool l2_ok = std::abs(l2.lambda - 0.608) <= 0.05;

  TrialDesign looped = design;
  looped.lambda1 = l1.lambda;
  const Scenario null_sc = threshold_scenario(0.97 - design.ni_margin);
  const int loop_reps = 2500;
  std::vector<int> noninferior(loop_reps, 0);
  const RngStream root(777001);
  parallel_for(loop_reps, 0, [&](std::size_t rep) {
    RngStream rng = root.child(rep);
    noninferior[rep] =
        (simulate_trial(looped, null_sc, rng).decision == Decision::NonInferior);
  });
  const double type1 =
      double(std::accumulate(noninferior.begin(), noninferior.end(), 0)) / loop_reps;
  const bool loop_ok = std::abs(type1 - 0.05) <= 0.01;

  std::ostringstream detail;
  detail << "lambda1 " << l1.lambda << " (0.037 +/- 0.02), lambda2 " << l2.lambda
         << " (0.608 +/- 0.05), closed-loop type I " << type1 << " (0.05 +/- 0.01)";
  report(4, l1_ok && l2_ok && loop_ok, detail.str());
}

// ---------------------------------------------------------------------------
// 5. Operating characteristics, scenarios 1..8 at the reference thresholds.
void criterion_5() {
  const TrialDesign design = default_design();
  std::vector<Scenario> scenarios;
  for (int i = 1; i <= 8; ++i) scenarios.push_back(oc_scenario(i));
  const auto rows = operating_characteristics(design, scenarios, 800, 515151, 0);

  const bool s2_ni = std::abs(rows[1].p_noninferior - 0.93) <= 0.05;
  const bool s2_joint = std::abs(rows[1].p_noninferior_and_correct - 0.77) <= 0.06;
  const bool s8_sup = std::abs(rows[7].p_superior - 0.78) <= 0.05;
  bool monotone = true;
  for (int i = 1; i < 8; ++i)
    if (rows[i].p_noninferior > rows[i - 1].p_noninferior) monotone = false;

  std::ostringstream detail;
  detail << "oc: s2 noninferior " << rows[1].p_noninferior << " (0.93 +/- 0.05), s2 joint "
         << rows[1].p_noninferior_and_correct << " (0.77 +/- 0.06), s8 superior "
         << rows[7].p_superior << " (0.78 +/- 0.05), noninferior monotone 1..8 "
         << (monotone ? "yes" : "no") << " [";
  for (int i = 0; i < 8; ++i) detail << (i ? " " : "") << rows[i].p_noninferior;
  detail << "]";
  report(5, s2_ni && s2_joint && s8_sup && monotone, detail.str());
}

// ---------------------------------------------------------------------------
// 6. ALC sample-size search.
void criterion_6() {
  AlcConfig cfg = AlcConfig::defaults();
  cfg.replicates = 800;
  const auto res = alc_search(cfg, default_priors(), 616161, 0);

  const bool sel_ok =
      res.qualified && std::abs(res.selected_n - 410) <= 20 && res.selected_r0 == 0.4;

  bool r04_min_everywhere = true;
  for (int n : cfg.n_grid) {
    double best_len = 1e9, len_04 = 1e9;
    for (const auto& cell : res.cells) {
      if (cell.n != n) continue;
      best_len = std::min(best_len, cell.avg_hpd_length);
      if (cell.r0 == 0.4) len_04 = cell.avg_hpd_length;
    }
    if (len_04 > best_len) r04_min_everywhere = false;
  }

  std::ostringstream detail;
  detail << "alc: selected n " << res.selected_n << " r0 " << res.selected_r0
         << " (target 410 +/- 20 at 0.4, qualified " << (res.qualified ? "yes" : "no")
         << "), r0=0.4 minimal at every n " << (r04_min_everywhere ? "yes" : "no");
  report(6, sel_ok && r04_min_everywhere, detail.str());
}

// ---------------------------------------------------------------------------
// 7. Bayesian predictive power for scenarios A/B/C.
void criterion_7() {
  const TrialDesign design = default_design();
  const auto rows = predictive_power(design, default_rr_scenarios(), 700, 717171, 0);

  const double conclusive_target[3] = {0.92, 0.92, 0.94};
  const double noninferior_target[3] = {0.83, 0.84, 0.88};
  bool pass = rows.size() == 3;
  std::ostringstream detail;
  detail << "power:";
  for (int i = 0; i < 3 && pass; ++i) {
    const bool c_ok = std::abs(rows[i].p_conclusive - conclusive_target[i]) <= 0.05;
    const bool n_ok = std::abs(rows[i].p_noninferior - noninferior_target[i]) <= 0.05;
    if (!(c_ok && n_ok)) pass = false;
  }
  for (std::size_t i = 0; i < rows.size(); ++i)
    detail << " " << rows[i].label << " conclusive " << rows[i].p_conclusive << "/"
           << conclusive_target[i] << " noninferior " << rows[i].p_noninferior << "/"
           << noninferior_target[i];
  const bool order_ok = rows.size() == 3 && rows[2].p_conclusive >= rows[0].p_conclusive;
  detail << " (+/- 0.05 each, C >= A " << (order_ok ? "yes" : "no") << ")";
  report(7, pass && order_ok, detail.str());
}

// ---------------------------------------------------------------------------
// 8. Byte-identical CLI reruns, invariant to the thread count.
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_outputs(const fs::path& a, const fs::path& b, std::string& diff) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.path().filename() == "manifest.json") continue;  // carries a wall-clock time
    names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  for (const auto& name : names) {
    if (!fs::exists(b / name)) {
      diff = name + " missing";
      return false;
    }
    if (slurp(a / name) != slurp(b / name)) {
      diff = name + " differs";
      return false;
    }
  }
  return !names.empty();
}

void criterion_8() {
  const char* env = std::getenv("DOSECOMB_BIN");
  const std::string bin = env ? env : "./dosecomb";
  const fs::path work = fs::temp_directory_path() / "dosecomb_accept8";
  fs::remove_all(work);
  fs::create_directories(work);

  const fs::path cfg = work / "cfg.json";
  std::ofstream(cfg) << R"({
    "alc": {"zeta": 0.07, "n_grid": [400, 410], "replicates": 30, "posterior_draws": 300},
    "gamma_grid": [0.05],
    "scenario": {"p_comparator": 0.97, "arms": [
      {"p_under": 0.136, "p_adequate": 0.83, "p_over": 0.034},
      {"p_under": 0.063, "p_adequate": 0.93, "p_over": 0.007},
      {"p_under": 0.1188, "p_adequate": 0.88, "p_over": 0.0012}]},
    "scenarios": [{"p_comparator": 0.97, "arms": [
      {"p_under": 0.136, "p_adequate": 0.83, "p_over": 0.034},
      {"p_under": 0.063, "p_adequate": 0.93, "p_over": 0.007},
      {"p_under": 0.1188, "p_adequate": 0.88, "p_over": 0.0012}]}],
    "run": {"seed": 11, "replicates": 10}
  })";
  const fs::path req = work / "req.json";
  std::ofstream(req) << R"({"period_index": 2, "counts": {"arms": [[2,40,1],[1,52,0],[3,35,2]]}})";

  struct Sub {
    std::string name;
    std::string extra;
  };
  const std::vector<Sub> subs = {{"alc", ""},      {"gamma", ""},
                                 {"calibrate-lambda", ""}, {"oc", ""},
                                 {"power", ""},    {"simulate", ""},
                                 {"interim", " --request " + req.string()}};

  bool pass = true;
  std::string detail = "cli reproducibility:";
  for (const auto& sub : subs) {
    std::vector<fs::path> outs;
    for (const auto& [tag, threads] : {std::pair{"a", 1}, {"b", 1}, {"t4", 4}, {"t8", 8}}) {
      const fs::path out = work / (sub.name + "_" + tag);
      std::ostringstream cmd;
      cmd << bin << " " << sub.name << " --config " << cfg.string() << sub.extra
          << " --draws 300 --threads " << threads << " --out " << out.string()
          << " > /dev/null 2>&1";
      if (std::system(cmd.str().c_str()) != 0) {
        pass = false;
        detail += " " + sub.name + "(run failed)";
        outs.clear();
        break;
      }
      outs.push_back(out);
    }
    if (outs.size() != 4) continue;
    std::string diff;
    for (std::size_t i = 1; i < outs.size(); ++i) {
      if (!same_outputs(outs[0], outs[i], diff)) {
        pass = false;
        detail += " " + sub.name + "(" + diff + ")";
        break;
      }
    }
  }
  if (pass) detail += " all subcommands byte-identical across reruns and threads {1,4,8}";
  report(8, pass, detail);
  fs::remove_all(work);
}

// ---------------------------------------------------------------------------
// 9. Simplex safety: hard assertion over varied posterior fits.
void criterion_9() {
  const TrialDesign design = default_design();
  SamplerConfig cfg = design.sampler;
  cfg.n_draws = 500;
  cfg.n_burnin = 500;
  RngStream rng(919191);
  long checked = 0, violations = 0;
  for (int rep = 0; rep < 60; ++rep) {
    OutcomeTable data;
    for (int arm = 0; arm < 3; ++arm) {
      const int n = static_cast<int>(rng.uniform01() * 120);
      std::array<int, 3> c{};
      for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        c[u < 0.2 ? 0 : (u < 0.55 ? 1 : 2)] += 1;  // deliberately hostile mix
      }
      data.arm_counts.push_back(c);
    }
    RngStream fit_rng = rng.child(rep);
    const auto draws = sample_dose_response(data, design.doses, design.priors, cfg, fit_rng);
    checked += static_cast<long>(draws.arm_probs.size());
    for (const auto& t : draws.arm_probs) {
      // exact invariants, no tolerances: strict interior of the simplex and
      // bitwise agreement of the adequate component with its definition
      if (!(t.p_under > 0.0 && t.p_under < 1.0)) ++violations;
      if (!(t.p_over > 0.0 && t.p_over < 1.0)) ++violations;
      if (!(t.p_adequate > 0.0 && t.p_adequate < 1.0)) ++violations;
      if (t.p_adequate != 1.0 - t.p_under - t.p_over) ++violations;
    }
  }
  std::ostringstream detail;
  detail << "simplex safety: " << checked << " posterior arm draws, " << violations
         << " violations";
  report(9, violations == 0, detail.str());
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  std::printf("%d of 9 criteria passed\n", 9 - g_failures);
  return g_failures;
}
