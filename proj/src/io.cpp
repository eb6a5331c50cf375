#include "dosecomb/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace dosecomb {

using nlohmann::json;

Config Config::defaults() {
  Config cfg;
  cfg.design = default_design();
  for (int i = 1; i <= 8; ++i) cfg.scenarios.push_back(oc_scenario(i));
  cfg.rr_scenarios = default_rr_scenarios();
  cfg.alc = AlcConfig::defaults();
  cfg.gamma_grid = default_gamma_grid();
  return cfg;
}

namespace {

[[noreturn]] void fail(const std::string& what) { throw ConfigError(what); }

template <typename T>
void maybe(const json& j, const char* key, T& target) {
  if (j.contains(key)) {
    try {
      target = j.at(key).get<T>();
    } catch (const json::exception& e) {
      fail(std::string("config field '") + key + "': " + e.what());
    }
  }
}

template <typename T>
T require(const json& j, const char* key, const std::string& section) {
  if (!j.contains(key))
    fail("config section '" + section + "': missing required field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(std::string("config field '") + key + "': " + e.what());
  }
}

BetaPrior beta_prior_from(const json& j, const std::string& section) {
  return {require<double>(j, "alpha", section), require<double>(j, "beta", section)};
}

CoefficientPrior coeff_prior_from(const json& j, const std::string& section) {
  CoefficientPrior p;
  p.location = require<double>(j, "location", section);
  p.scale = require<double>(j, "scale", section);
  p.degrees_of_freedom = require<double>(j, "df", section);
  return p;
}

Scenario scenario_from(const json& j) {
  Scenario s;
  s.p_comparator = require<double>(j, "p_comparator", "scenario");
  maybe(j, "description", s.description);
  if (!j.contains("arms")) fail("config section 'scenario': missing required field 'arms'");
  for (const auto& arm : j.at("arms")) {
    ArmTruth t;
    t.p_under = require<double>(arm, "p_under", "scenario.arms");
    t.p_adequate = require<double>(arm, "p_adequate", "scenario.arms");
    t.p_over = require<double>(arm, "p_over", "scenario.arms");
    if (t.p_under < 0.0 || t.p_adequate < 0.0 || t.p_over < 0.0 ||
        std::abs(t.p_under + t.p_adequate + t.p_over - 1.0) > 1e-12)
      fail("scenario arm probabilities must be non-negative and sum to 1");
    s.arm_truths.push_back(t);
  }
  return s;
}

RrScenario rr_scenario_from(const json& j) {
  RrScenario s;
  s.label = require<std::string>(j, "label", "rr_scenarios");
  s.relative_risks = require<std::vector<double>>(j, "relative_risks", "rr_scenarios");
  s.over_fractions = require<std::vector<double>>(j, "over_fractions", "rr_scenarios");
  for (double rr : s.relative_risks)
    if (!(rr > 0.0)) fail("rr_scenarios: relative risks must be positive");
  for (double f : s.over_fractions)
    if (f < 0.0 || f > 1.0) fail("rr_scenarios: over fractions must lie in [0, 1]");
  return s;
}

json beta_prior_to(const BetaPrior& p) { return {{"alpha", p.alpha}, {"beta", p.beta}}; }

json coeff_prior_to(const CoefficientPrior& p) {
  return {{"location", p.location}, {"scale", p.scale}, {"df", p.degrees_of_freedom}};
}

json scenario_to(const Scenario& s) {
  json arms = json::array();
  for (const auto& t : s.arm_truths)
    arms.push_back({{"p_under", t.p_under},
                    {"p_adequate", t.p_adequate},
                    {"p_over", t.p_over}});
  return {{"description", s.description},
          {"p_comparator", s.p_comparator},
          {"arms", arms}};
}

json rr_scenario_to(const RrScenario& s) {
  return {{"label", s.label},
          {"relative_risks", s.relative_risks},
          {"over_fractions", s.over_fractions}};
}

}  // namespace

Config config_from_json(const json& j) {
  Config cfg = Config::defaults();
  if (!j.is_object()) fail("config root must be a JSON object");

  if (j.contains("design")) {
    const auto& d = j.at("design");
    if (d.contains("doses")) {
      cfg.design.doses.clear();
      for (const auto& dose : d.at("doses")) {
        DoseCombination dc;
        dc.ketamine_dose = require<double>(dose, "ketamine", "design.doses");
        dc.dexmedetomidine_dose = require<double>(dose, "dexmedetomidine", "design.doses");
        maybe(dose, "label", dc.label);
        cfg.design.doses.push_back(dc);
      }
    }
    maybe(d, "comparator_fraction", cfg.design.comparator_fraction);
    maybe(d, "drop_threshold", cfg.design.drop_threshold);
    maybe(d, "ni_margin", cfg.design.ni_margin);
    maybe(d, "lambda1", cfg.design.lambda1);
    maybe(d, "lambda2", cfg.design.lambda2);
    if (d.contains("schedule")) {
      const auto& s = d.at("schedule");
      cfg.design.schedule.analysis_points =
          require<std::vector<int>>(s, "analysis_points", "design.schedule");
      cfg.design.schedule.total_n = require<int>(s, "total_n", "design.schedule");
    }
  }

  if (j.contains("priors")) {
    const auto& p = j.at("priors");
    auto& pri = cfg.design.priors;
    if (p.contains("comparator")) pri.comparator = beta_prior_from(p.at("comparator"), "priors.comparator");
    if (p.contains("novel_direct")) pri.novel_direct = beta_prior_from(p.at("novel_direct"), "priors.novel_direct");
    if (p.contains("interim_arm")) pri.interim_arm = beta_prior_from(p.at("interim_arm"), "priors.interim_arm");
    if (p.contains("under_intercept")) pri.under_intercept = coeff_prior_from(p.at("under_intercept"), "priors.under_intercept");
    if (p.contains("under_slope_a")) pri.under_slope_a = coeff_prior_from(p.at("under_slope_a"), "priors.under_slope_a");
    if (p.contains("under_slope_b")) pri.under_slope_b = coeff_prior_from(p.at("under_slope_b"), "priors.under_slope_b");
    if (p.contains("over_intercept")) pri.over_intercept = coeff_prior_from(p.at("over_intercept"), "priors.over_intercept");
    if (p.contains("over_slope_a")) pri.over_slope_a = coeff_prior_from(p.at("over_slope_a"), "priors.over_slope_a");
    if (p.contains("over_slope_b")) pri.over_slope_b = coeff_prior_from(p.at("over_slope_b"), "priors.over_slope_b");
  }

  if (j.contains("sampler")) {
    const auto& s = j.at("sampler");
    maybe(s, "draws", cfg.design.sampler.n_draws);
    maybe(s, "burnin", cfg.design.sampler.n_burnin);
    maybe(s, "chains", cfg.design.sampler.n_chains);
    maybe(s, "proposal_scale", cfg.design.sampler.proposal_scale);
    maybe(s, "adapt", cfg.design.sampler.adapt);
  }

  if (j.contains("scenario")) cfg.scenario = scenario_from(j.at("scenario"));

  if (j.contains("scenarios")) {
    cfg.scenarios.clear();
    for (const auto& s : j.at("scenarios")) cfg.scenarios.push_back(scenario_from(s));
  }

  if (j.contains("rr_scenarios")) {
    cfg.rr_scenarios.clear();
    for (const auto& s : j.at("rr_scenarios"))
      cfg.rr_scenarios.push_back(rr_scenario_from(s));
  }

  if (j.contains("alc")) {
    const auto& a = j.at("alc");
    cfg.alc.zeta = require<double>(a, "zeta", "alc");
    maybe(a, "n_grid", cfg.alc.n_grid);
    maybe(a, "r0_grid", cfg.alc.r0_grid);
    maybe(a, "replicates", cfg.alc.replicates);
    maybe(a, "posterior_draws", cfg.alc.posterior_draws);
    maybe(a, "novel_share", cfg.alc.novel_share);
  }

  maybe(j, "gamma_grid", cfg.gamma_grid);

  if (j.contains("run")) {
    const auto& r = j.at("run");
    maybe(r, "seed", cfg.run.seed);
    maybe(r, "replicates", cfg.run.replicates);
    maybe(r, "threads", cfg.run.threads);
  }

  validate_design(cfg.design);
  return cfg;
}

Config config_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail("config parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const Config& cfg) {
  json doses = json::array();
  for (const auto& d : cfg.design.doses)
    doses.push_back({{"ketamine", d.ketamine_dose},
                     {"dexmedetomidine", d.dexmedetomidine_dose},
                     {"label", d.label}});
  json scenarios = json::array();
  for (const auto& s : cfg.scenarios) scenarios.push_back(scenario_to(s));
  json rr = json::array();
  for (const auto& s : cfg.rr_scenarios) rr.push_back(rr_scenario_to(s));

  json j = {
      {"design",
       {{"doses", doses},
        {"comparator_fraction", cfg.design.comparator_fraction},
        {"drop_threshold", cfg.design.drop_threshold},
        {"ni_margin", cfg.design.ni_margin},
        {"lambda1", cfg.design.lambda1},
        {"lambda2", cfg.design.lambda2},
        {"schedule",
         {{"analysis_points", cfg.design.schedule.analysis_points},
          {"total_n", cfg.design.schedule.total_n}}}}},
      {"priors",
       {{"comparator", beta_prior_to(cfg.design.priors.comparator)},
        {"novel_direct", beta_prior_to(cfg.design.priors.novel_direct)},
        {"interim_arm", beta_prior_to(cfg.design.priors.interim_arm)},
        {"under_intercept", coeff_prior_to(cfg.design.priors.under_intercept)},
        {"under_slope_a", coeff_prior_to(cfg.design.priors.under_slope_a)},
        {"under_slope_b", coeff_prior_to(cfg.design.priors.under_slope_b)},
        {"over_intercept", coeff_prior_to(cfg.design.priors.over_intercept)},
        {"over_slope_a", coeff_prior_to(cfg.design.priors.over_slope_a)},
        {"over_slope_b", coeff_prior_to(cfg.design.priors.over_slope_b)}}},
      {"sampler",
       {{"draws", cfg.design.sampler.n_draws},
        {"burnin", cfg.design.sampler.n_burnin},
        {"chains", cfg.design.sampler.n_chains},
        {"proposal_scale", cfg.design.sampler.proposal_scale},
        {"adapt", cfg.design.sampler.adapt}}},
      {"scenarios", scenarios},
      {"rr_scenarios", rr},
      {"alc",
       {{"zeta", cfg.alc.zeta},
        {"n_grid", cfg.alc.n_grid},
        {"r0_grid", cfg.alc.r0_grid},
        {"replicates", cfg.alc.replicates},
        {"posterior_draws", cfg.alc.posterior_draws},
        {"novel_share", cfg.alc.novel_share}}},
      {"gamma_grid", cfg.gamma_grid},
      // threads is an execution detail with no effect on results; keeping it
      // out of the serialisation keeps echoes and digests machine-independent
      {"run", {{"seed", cfg.run.seed}, {"replicates", cfg.run.replicates}}},
  };
  if (cfg.scenario) j["scenario"] = scenario_to(*cfg.scenario);
  return j;
}

std::string config_digest(const Config& cfg) {
  const std::string canonical = config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  auto write_field = [&out](const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) {
      out << field;
      return;
    }
    out << '"';
    for (char c : field) {
      if (c == '"') out << '"';
      out << c;
    }
    out << '"';
  };
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      write_field(row[i]);
    }
    out << "\r\n";
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
  if (!out) throw IoError("write failed: " + path);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace dosecomb
