// eulerlab <command> --config FILE [--seed S] [--out DIR] [--workers W]
// Exit codes: 0 ok, 2 configuration, 3 numerical failure, 4 io.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "eulerlab/config.hpp"
#include "eulerlab/errors.hpp"
#include "eulerlab/experiment.hpp"
#include "eulerlab/io.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;
constexpr int kIoError = 4;

int fail(int code, const std::string& kind, const std::string& msg) {
  std::cerr << "eulerlab: " << kind << ": " << msg << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace eulerlab;

  CLI::App app{"Stochastic 2D Euler experiments"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> workers;

  for (Command c : {Command::simulate_spectral, Command::simulate_grid, Command::check_invariance,
                    Command::estimate_density, Command::sweep_epsilon, Command::condensation}) {
    auto* sub = app.add_subcommand(std::string(command_name(c)));
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--out", out, "Override the output directory");
    sub->add_option("--workers", workers, "Worker threads (default: EULERLAB_WORKERS, then APP_WORKERS, then 1)")
        ->check(CLI::NonNegativeNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }
  const std::string name = app.get_subcommands().front()->get_name();

  ExperimentConfig cfg;
  try {
    cfg = parse_config(read_file(config_path));
  } catch (const IoError& e) {
    return fail(kIoError, "io error", e.what());
  } catch (const ParseError& e) {
    return fail(kConfigError, "config parse error", e.what());
  } catch (const ValidationError& e) {
    std::cerr << "eulerlab: invalid config " << config_path << ":\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v << "\n";
    return kConfigError;
  }
  if (command_name(cfg.command()) != name) {
    return fail(kConfigError, "config error",
                "config is for \"" + std::string(command_name(cfg.command())) + "\", invoked as \"" + name + "\"");
  }
  if (seed) cfg.seed = *seed;
  if (out) cfg.output = *out;
  if (workers) cfg.workers = *workers;

  try {
    const RunSummary summary = run_experiment(cfg);
    std::cout << summary.line() << std::endl;
    return 0;
  } catch (const IoError& e) {
    return fail(kIoError, "io error", e.what());
  } catch (const NumericalFailure& e) {
    return fail(kNumericalError, "numerical failure", e.what());
  } catch (const InvalidArgument& e) {
    return fail(kConfigError, "invalid parameters", e.what());
  } catch (const std::exception& e) {
    return fail(1, "error", e.what());
  }
}
