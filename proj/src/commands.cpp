#include "dosecomb/commands.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <random>
#include <thread>

#include "dosecomb/calibration.hpp"
#include "dosecomb/trial.hpp"

namespace dosecomb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunContext {
  Config cfg;
  std::string digest;
  std::uint64_t seed = 0;
  int threads = 1;
  fs::path out;
  std::chrono::steady_clock::time_point started;
};

RunContext prepare(const CommandOptions& opts) {
  RunContext ctx;
  ctx.started = std::chrono::steady_clock::now();
  ctx.cfg = load_config(opts);
  if (opts.seed)
    ctx.cfg.run.seed = *opts.seed;
  else if (opts.entropy_seed)
    ctx.cfg.run.seed = (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^
                       std::random_device{}();
  if (opts.replicates) ctx.cfg.run.replicates = *opts.replicates;
  if (opts.threads) ctx.cfg.run.threads = *opts.threads;
  if (opts.draws) {
    ctx.cfg.design.sampler.n_draws = *opts.draws;
    ctx.cfg.alc.posterior_draws = *opts.draws;
  }
  ctx.digest = config_digest(ctx.cfg);
  ctx.seed = ctx.cfg.run.seed;
  ctx.threads = ctx.cfg.run.threads > 0
                    ? ctx.cfg.run.threads
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  ctx.out = fs::path(opts.out_dir);
  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  if (ec) throw IoError("cannot create output directory: " + opts.out_dir);
  return ctx;
}

int replicates_or(const RunContext& ctx, int fallback) {
  return ctx.cfg.run.replicates > 0 ? ctx.cfg.run.replicates : fallback;
}

void write_manifest(const RunContext& ctx, const std::string& command, int replicates) {
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - ctx.started)
                           .count();
  json m = {{"schema", "manifest-v1"},
            {"command", command},
            {"config_digest", ctx.digest},
            {"root_seed", ctx.seed},
            {"replicates", replicates},
            {"threads", ctx.threads},
            {"duration_ms", elapsed},
            {"tool_version", kToolVersion}};
  write_text_file((ctx.out / "manifest.json").string(), m.dump(2) + "\n");
  write_text_file((ctx.out / "config_echo.json").string(),
                  config_to_json(ctx.cfg).dump(2) + "\n");
}

std::vector<std::string> meta_cols(const RunContext& ctx, const char* schema) {
  return {schema, std::to_string(ctx.seed), ctx.digest};
}

void append_meta(CsvTable& table, const RunContext& ctx, const char* schema) {
  table.header.insert(table.header.begin(), {"schema", "seed", "digest"});
  for (auto& row : table.rows) {
    const auto meta = meta_cols(ctx, schema);
    row.insert(row.begin(), meta.begin(), meta.end());
  }
}

}  // namespace

Config load_config(const CommandOptions& opts) {
  if (opts.config_path.empty()) return Config::defaults();
  return config_from_file(opts.config_path);
}

void cmd_validate(const CommandOptions& opts) {
  const Config cfg = load_config(opts);
  validate_design(cfg.design);
  std::cout << "config ok (digest " << config_digest(cfg) << ")\n";
}

void cmd_alc(const CommandOptions& opts) {
  RunContext ctx = prepare(opts);
  AlcConfig alc = ctx.cfg.alc;
  if (ctx.cfg.run.replicates > 0) alc.replicates = ctx.cfg.run.replicates;
  const auto result = alc_search(alc, ctx.cfg.design.priors, ctx.seed, ctx.threads);

  CsvTable table;
  table.header = {"n", "r0", "avg_hpd_length", "mc_stderr"};
  for (const auto& cell : result.cells)
    table.rows.push_back({std::to_string(cell.n), format_num(cell.r0),
                          format_num(cell.avg_hpd_length), format_num(cell.mc_stderr)});
  append_meta(table, ctx, "alc-v1");
  write_csv((ctx.out / "alc.csv").string(), table);

  json sel = {{"schema", "alc-selection-v1"},
              {"qualified", result.qualified},
              {"selected_n", result.selected_n},
              {"selected_r0", result.selected_r0},
              {"zeta", alc.zeta}};
  write_text_file((ctx.out / "alc_selection.json").string(), sel.dump(2) + "\n");
  write_manifest(ctx, "alc", alc.replicates);
  if (result.qualified)
    std::cout << "alc: selected n=" << result.selected_n << " r0=" << result.selected_r0
              << "\n";
  else
    std::cout << "alc: no grid point meets zeta=" << alc.zeta << "\n";
}

void cmd_gamma(const CommandOptions& opts) {
  RunContext ctx = prepare(opts);
  const int replicates = replicates_or(ctx, 7000);
  const Scenario scenario = ctx.cfg.scenario ? *ctx.cfg.scenario : oc_scenario(1);
  const auto result = gamma_search(ctx.cfg.design, ctx.cfg.gamma_grid, scenario,
                                   replicates, ctx.seed, ctx.threads);

  CsvTable table;
  table.header = {"gamma",          "plurality_prob", "mc_stderr",
                  "mean_optimal_n", "optimal_n_q025", "optimal_n_q975"};
  for (const auto& cell : result.cells)
    table.rows.push_back({format_num(cell.gamma), format_num(cell.plurality_prob),
                          format_num(cell.mc_stderr), format_num(cell.mean_optimal_n),
                          format_num(cell.optimal_n_q025), format_num(cell.optimal_n_q975)});
  append_meta(table, ctx, "gamma-v1");
  write_csv((ctx.out / "gamma.csv").string(), table);

  json sel = {{"schema", "gamma-selection-v1"},
              {"selected_gamma", result.selected_gamma}};
  write_text_file((ctx.out / "gamma_selection.json").string(), sel.dump(2) + "\n");
  write_manifest(ctx, "gamma", replicates);
  std::cout << "gamma: selected " << result.selected_gamma << "\n";
}

void cmd_calibrate_lambda(const CommandOptions& opts) {
  RunContext ctx = prepare(opts);
  const int replicates = replicates_or(ctx, 7000);
  const auto l1 =
      calibrate_lambda1(ctx.cfg.design, replicates, ctx.seed ^ 0x11ULL, ctx.threads);
  const auto l2 =
      calibrate_lambda2(ctx.cfg.design, replicates, ctx.seed ^ 0x22ULL, ctx.threads);

  CsvTable table;
  table.header = {"threshold", "null_p_optimal", "value", "replicates"};
  table.rows.push_back({"lambda1", format_num(0.97 - ctx.cfg.design.ni_margin),
                        format_num(l1.lambda), std::to_string(replicates)});
  table.rows.push_back(
      {"lambda2", format_num(0.78), format_num(l2.lambda), std::to_string(replicates)});
  append_meta(table, ctx, "lambda-v1");
  write_csv((ctx.out / "lambda.csv").string(), table);
  write_manifest(ctx, "calibrate-lambda", replicates);
  std::cout << "lambda1=" << l1.lambda << " lambda2=" << l2.lambda << "\n";
}

void cmd_oc(const CommandOptions& opts) {
  RunContext ctx = prepare(opts);
  const int replicates = replicates_or(ctx, 7000);
  const auto rows = operating_characteristics(ctx.cfg.design, ctx.cfg.scenarios,
                                              replicates, ctx.seed, ctx.threads);

  CsvTable table;
  table.header = {"scenario",      "p_noninferior", "p_inconclusive",
                  "p_superior",    "p_joint",       "se_noninferior",
                  "se_inconclusive", "se_superior", "se_joint"};
  for (const auto& row : rows) {
    table.rows.push_back(
        {row.scenario_id, format_num(row.p_noninferior), format_num(row.p_inconclusive),
         format_num(row.p_superior),
         row.joint_reported ? format_num(row.p_noninferior_and_correct) : "",
         format_num(row.se_noninferior), format_num(row.se_inconclusive),
         format_num(row.se_superior),
         row.joint_reported ? format_num(row.se_noninferior_and_correct) : ""});
  }
  append_meta(table, ctx, "oc-v1");
  write_csv((ctx.out / "oc.csv").string(), table);
  write_manifest(ctx, "oc", replicates);
  std::cout << "oc: " << rows.size() << " scenarios, " << replicates
            << " replicates each\n";
}

void cmd_power(const CommandOptions& opts) {
  RunContext ctx = prepare(opts);
  const int replicates = replicates_or(ctx, 2000);
  const auto rows = predictive_power(ctx.cfg.design, ctx.cfg.rr_scenarios, replicates,
                                     ctx.seed, ctx.threads);

  CsvTable table;
  table.header = {"scenario", "p_conclusive", "p_noninferior", "se_conclusive",
                  "se_noninferior"};
  for (const auto& row : rows)
    table.rows.push_back({row.label, format_num(row.p_conclusive),
                          format_num(row.p_noninferior), format_num(row.se_conclusive),
                          format_num(row.se_noninferior)});
  append_meta(table, ctx, "power-v1");
  write_csv((ctx.out / "power.csv").string(), table);
  write_manifest(ctx, "power", replicates);
  std::cout << "power: " << rows.size() << " scenarios, " << replicates
            << " replicates each\n";
}

void cmd_simulate(const CommandOptions& opts) {
  RunContext ctx = prepare(opts);
  const int replicates = replicates_or(ctx, 1000);
  if (!ctx.cfg.scenario)
    throw ConfigError("simulate: config must provide a 'scenario' section");
  const Scenario& scenario = *ctx.cfg.scenario;
  validate_design(ctx.cfg.design);

  const int n_arms = static_cast<int>(ctx.cfg.design.doses.size());
  std::vector<TrialResult> results(replicates);
  const RngStream root(ctx.seed);
  parallel_for(replicates, ctx.threads, [&](std::size_t rep) {
    RngStream rng = root.child(rep);
    results[rep] = simulate_trial(ctx.cfg.design, scenario, rng);
  });

  CsvTable table;
  table.header = {"replicate", "decision", "selected_arm", "y", "comparator_n"};
  for (int i = 0; i < n_arms; ++i) table.header.push_back("arm" + std::to_string(i) + "_n");
  long ni = 0, inc = 0, sup = 0;
  for (int rep = 0; rep < replicates; ++rep) {
    const auto& r = results[rep];
    std::vector<std::string> row = {std::to_string(rep), to_string(r.decision),
                                    std::to_string(r.selected_arm), format_num(r.y_stat)};
    int comparator_n = 0;
    for (const auto& alloc : r.allocations) comparator_n += alloc.comparator_n;
    row.push_back(std::to_string(comparator_n));
    for (int tot : r.arm_totals()) row.push_back(std::to_string(tot));
    table.rows.push_back(std::move(row));
    ni += (r.decision == Decision::NonInferior);
    inc += (r.decision == Decision::Inconclusive);
    sup += (r.decision == Decision::ComparatorSuperior);
  }
  append_meta(table, ctx, "trials-v1");
  write_csv((ctx.out / "trials.csv").string(), table);

  CsvTable summary;
  summary.header = {"decision", "fraction"};
  summary.rows.push_back({"non_inferior", format_num(double(ni) / replicates)});
  summary.rows.push_back({"inconclusive", format_num(double(inc) / replicates)});
  summary.rows.push_back({"comparator_superior", format_num(double(sup) / replicates)});
  append_meta(summary, ctx, "trials-summary-v1");
  write_csv((ctx.out / "summary.csv").string(), summary);
  write_manifest(ctx, "simulate", replicates);
  std::cout << "simulate: " << replicates << " replicates, non-inferior fraction "
            << double(ni) / replicates << "\n";
}

void cmd_interim(const CommandOptions& opts, const std::string& request_path) {
  RunContext ctx = prepare(opts);
  json j;
  try {
    j = json::parse(read_text_file(request_path));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("interim request parse error: ") + e.what());
  }
  if (j.contains("design")) {
    json wrapped = {{"design", j.at("design")}};
    ctx.cfg.design = config_from_json(wrapped).design;
  }
  if (!j.contains("counts") || !j.at("counts").contains("arms"))
    throw ConfigError("interim request: missing counts.arms");
  OutcomeTable counts;
  for (const auto& arm : j.at("counts").at("arms")) {
    if (!arm.is_array() || arm.size() != 3)
      throw ConfigError("interim request: each arm needs [under, adequate, over]");
    std::array<int, 3> c{arm[0].get<int>(), arm[1].get<int>(), arm[2].get<int>()};
    if (c[0] < 0 || c[1] < 0 || c[2] < 0)
      throw ConfigError("interim request: counts must be non-negative");
    counts.arm_counts.push_back(c);
  }
  if (counts.arm_counts.size() != ctx.cfg.design.doses.size())
    throw ConfigError("interim request: arm count must match the design's dose list");
  const int period = j.value("period_index", 1);

  std::vector<double> raw;
  const auto probs = interim_probs(counts, ctx.cfg.design.priors,
                                   ctx.cfg.design.drop_threshold, &raw);
  std::vector<bool> dropped(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    dropped[i] = (probs[i] == 0.0 && raw[i] > 0.0);

  json out = {{"schema", "interim-v1"},
              {"period", period},
              {"raw_probs", raw},
              {"post_drop_probs", probs},
              {"dropped", dropped}};
  write_text_file((ctx.out / "interim.json").string(), out.dump(2) + "\n");
  write_manifest(ctx, "interim", 0);
  std::cout << "interim: wrote " << (ctx.out / "interim.json").string() << "\n";
}

}  // namespace dosecomb
