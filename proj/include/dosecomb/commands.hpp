#pragma once

#include <optional>
#include <string>

#include "dosecomb/io.hpp"

namespace dosecomb {

// Shared front end for the CLI subcommands; tests drive these directly.
struct CommandOptions {
  std::string config_path; // empty -> reference-design defaults
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> replicates;
  std::optional<int> threads;
  std::optional<int> draws;
  bool entropy_seed = false; // seed from std::random_device instead of default
};

Config load_config(const CommandOptions& opts);

void cmd_validate(const CommandOptions& opts);
void cmd_alc(const CommandOptions& opts);
void cmd_gamma(const CommandOptions& opts);
void cmd_calibrate_lambda(const CommandOptions& opts);
void cmd_oc(const CommandOptions& opts);
void cmd_power(const CommandOptions& opts);
void cmd_simulate(const CommandOptions& opts);
void cmd_interim(const CommandOptions& opts, const std::string& request_path);

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace dosecomb
