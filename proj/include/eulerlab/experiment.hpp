#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "eulerlab/config.hpp"
#include "eulerlab/density.hpp"
#include "eulerlab/grid_solver.hpp"

namespace eulerlab {

struct RunSummary {
  Command command = Command::simulate_spectral;
  std::uint64_t seed = 0;
  /// Key scalar results, first one is the headline.
  std::vector<std::pair<std::string, double>> metrics;
  double wall_seconds = 0.0;
  std::vector<std::filesystem::path> files;

  double metric(std::string_view name) const;  // throws InvalidArgument if absent
  /// "<command> seed=<s> <name>=<v> ... wall=<t>s"
  std::string line() const;
};

/// Runs one validated experiment, writes its files under config.output and
/// returns the summary. Module errors propagate unchanged. Every output file
/// is written atomically and depends only on the config (no timings).
RunSummary run_experiment(const ExperimentConfig& config);

/// Drift, domain and boundary data of a density problem. z are the rescaled
/// coordinates; drift is -B' for the reduction.
struct DensitySetup {
  ZDrift drift;
  DomainSpec domain;
  BoundaryFunction boundary;
};
DensitySetup make_density_setup(const DensityProblem& problem);
EstimateOptions estimate_options(const DensityProblem& problem, int workers);

/// Extremes of the boundary data over a dense deterministic sample of the boundary.
std::pair<double, double> boundary_range(const DensitySetup& setup, std::size_t per_face = 64);

/// Successive-difference trend test along one point of an epsilon sweep:
/// d_j = |R_{j+1} - R_j| must satisfy d_{j+1} <= d_j + 2 sqrt(s_j^2 + 4 s_{j+1}^2 + s_{j+2}^2),
/// the allowance being twice the standard error of R_{j+2} - 2 R_{j+1} + R_j.
struct TrendCheck {
  std::size_t point = 0;
  std::size_t j = 0;
  double d_j = 0.0;
  double d_next = 0.0;
  double allowance = 0.0;
  bool ok = true;
};
std::vector<TrendCheck> sweep_trend(const SweepResult& sweep, std::size_t points);

/// Maximum principle and positivity over every estimate of a sweep.
struct BoundCheck {
  std::size_t violations = 0;  // outside [min f - 3 s, max f + 3 s]
  std::size_t non_positive = 0;  // estimate <= 0 while min f > 0
};
BoundCheck sweep_bounds(const SweepResult& sweep, const std::pair<double, double>& range);

struct CondensationRun {
  std::string label;  // "free_<i>", "box", "pinning"
  std::uint64_t seed = 0;
  GridConstraint constraint;
  double initial_fraction = 0.0;
  double final_fraction = 0.0;
  bool constraint_held = true;  // at every snapshot
  std::vector<GridSnapshot> snapshots;
};

struct CondensationResult {
  std::vector<CondensationRun> runs;  // seeds free runs, then box, then pinning
  std::size_t condensed = 0;
  double box_difference = 0.0;  // |free_0 - box| in lowest-shell fraction
  double pinning_difference = 0.0;
  bool constraints_held = true;
  bool passed = false;

  const CondensationRun& free_run(std::size_t i) const { return runs.at(i); }
  const CondensationRun& box_run() const { return runs.at(runs.size() - 2); }
  const CondensationRun& pinning_run() const { return runs.at(runs.size() - 1); }
};

/// Seed i runs with derive_seed(seed, "condensation/<i>"); the constrained runs
/// reuse the seed of free run 0 so that only the constraint differs.
CondensationResult condensation_experiment(const CondensationParams& params, std::uint64_t seed, int workers = 0);

GridField initial_grid_field(const GridRunParams& params);
GridSimConfig grid_sim_config(const GridRunParams& params, std::uint64_t seed);

}  // namespace eulerlab
