#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dosecomb/calibration.hpp"
#include "dosecomb/types.hpp"

namespace dosecomb {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunParams {
  std::uint64_t seed = 20240817ULL; // fixed default keeps runs reproducible
  int replicates = 0;               // 0 -> per-command default
  int threads = 0;                  // 0 -> available parallelism
};

// Fully-resolved run configuration. Every field carries the reference-design
// default; a config file overrides selectively.
struct Config {
  TrialDesign design;
  std::optional<Scenario> scenario;    // for `simulate`
  std::vector<Scenario> scenarios;     // for `oc`
  std::vector<RrScenario> rr_scenarios;
  AlcConfig alc;
  std::vector<double> gamma_grid;
  RunParams run;

  static Config defaults();
};

Config config_from_json(const nlohmann::json& j);
Config config_from_file(const std::string& path);
nlohmann::json config_to_json(const Config& cfg);

// FNV-1a over the canonical serialisation; recomputable from the config echo.
std::string config_digest(const Config& cfg);

std::string format_num(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::string& path, const CsvTable& table);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace dosecomb
