#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dosecomb/commands.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSampler = 3;
constexpr int kExitIo = 4;

void add_common_flags(CLI::App* app, dosecomb::CommandOptions& opts) {
  app->add_option("--config", opts.config_path, "JSON config file (defaults used if omitted)");
  app->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
  auto* seed = app->add_option("--seed", "root RNG seed (unsigned integer, or 'entropy')");
  seed->check([&opts](const std::string& v) -> std::string {
    if (v == "entropy") {
      opts.entropy_seed = true;
      return {};
    }
    try {
      std::size_t pos = 0;
      opts.seed = std::stoull(v, &pos);
      if (pos != v.size()) return "not an unsigned integer: " + v;
    } catch (const std::exception&) {
      return "not an unsigned integer: " + v;
    }
    return {};
  });
  app->add_option_function<int>(
         "--replicates",
         [&opts](int v) { opts.replicates = v; },
         "Monte Carlo replicates (overrides config)")
      ->check(CLI::PositiveNumber);
  app->add_option_function<int>(
         "--threads", [&opts](int v) { opts.threads = v; }, "worker threads")
      ->check(CLI::PositiveNumber);
  app->add_option_function<int>(
         "--draws", [&opts](int v) { opts.draws = v; }, "posterior draws per fit")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian adaptive dose-combination trial engine"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dosecomb::kToolVersion));

  dosecomb::CommandOptions opts;
  std::string interim_request;

  auto* alc = app.add_subcommand("alc", "sample-size search by average HPD length");
  auto* gamma = app.add_subcommand("gamma", "drop-threshold search");
  auto* lambda = app.add_subcommand("calibrate-lambda", "decision-threshold calibration");
  auto* oc = app.add_subcommand("oc", "operating characteristics across scenarios");
  auto* power = app.add_subcommand("power", "Bayesian predictive power");
  auto* simulate = app.add_subcommand("simulate", "replicate trials under one scenario");
  auto* interim = app.add_subcommand("interim", "one interim randomisation update");
  auto* validate = app.add_subcommand("validate", "check a config file and exit");

  for (auto* sub : {alc, gamma, lambda, oc, power, simulate, interim, validate})
    add_common_flags(sub, opts);
  interim->add_option("--request", interim_request, "interim request JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (alc->parsed()) dosecomb::cmd_alc(opts);
    else if (gamma->parsed()) dosecomb::cmd_gamma(opts);
    else if (lambda->parsed()) dosecomb::cmd_calibrate_lambda(opts);
    else if (oc->parsed()) dosecomb::cmd_oc(opts);
    else if (power->parsed()) dosecomb::cmd_power(opts);
    else if (simulate->parsed()) dosecomb::cmd_simulate(opts);
    else if (interim->parsed()) dosecomb::cmd_interim(opts, interim_request);
    else if (validate->parsed()) dosecomb::cmd_validate(opts);
  } catch (const dosecomb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const dosecomb::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const dosecomb::SamplerError& e) {
    std::cerr << "sampler error: " << e.what() << "\n";
    return kExitSampler;
  } catch (const dosecomb::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
