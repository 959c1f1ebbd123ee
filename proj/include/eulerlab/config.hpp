#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "eulerlab/density.hpp"
#include "eulerlab/grid_solver.hpp"
#include "eulerlab/sde.hpp"

namespace eulerlab {

enum class Command { simulate_spectral, simulate_grid, check_invariance, estimate_density, sweep_epsilon, condensation };

std::string_view command_name(Command c);
/// Inverse of command_name; throws InvalidArgument on an unknown name.
Command parse_command(std::string_view name);

struct SpectralRunParams {
  int truncation = 4;
  double dt = 1e-3;
  std::uint64_t steps = 1000;
  std::uint64_t record_every = 100;
  Scheme scheme = Scheme::rk4;
  /// "single_mode", "enstrophy_sample" or "energy_sample".
  std::string initial = "single_mode";
  std::array<int, 2> mode{1, 0};
  /// Single-mode amplitude, or the factor applied to a Gaussian sample.
  double amplitude = 1.0;
  double epsilon = 0.0;
  NoiseProfile noise = NoiseProfile::inverse_k2;
  /// "none", "enstrophy" or "energy".
  std::string ou = "none";

  friend bool operator==(const SpectralRunParams&, const SpectralRunParams&) = default;
};

struct GridRunParams {
  int n = 32;
  double dt = 1e-3;
  std::uint64_t steps = 1000;
  double epsilon = 0.0;
  std::uint64_t snapshot_every = 100;
  GridConstraint constraint;
  GridStepper stepper = GridStepper::frozen;
  /// "cellular" or "plane_wave".
  std::string initial = "cellular";
  std::array<int, 2> mode{4, 4};
  double amplitude = 0.01;
  bool write_snapshots = true;

  friend bool operator==(const GridRunParams&, const GridRunParams&) = default;
};

struct InvarianceParams {
  int truncation = 6;
  std::uint64_t states = 100;
  /// "enstrophy" or "energy": the Gaussian measure and its OU pair.
  std::string measure = "enstrophy";
  double state_scale = 1.0;

  friend bool operator==(const InvarianceParams&, const InvarianceParams&) = default;
};

/// Density problem shared by estimate-density and sweep-epsilon.
struct DensityProblem {
  /// "harmonic": zero drift. "reduction": b = -B' on the two-mode slice.
  std::string problem = "harmonic";
  double rotation = 1.0;  // reduction only: Omega = 4 pi^2 c
  /// "box" or "ball".
  std::string domain = "ball";
  std::vector<double> half_widths{2.0, 2.0};
  double radius = 1.0;
  int dimension = 2;  // ball only; a box takes it from half_widths
  /// "constant", "coordinate" or "enstrophy" (reduction only).
  std::string boundary = "coordinate";
  double boundary_value = 1.0;
  int boundary_index = 0;
  std::uint64_t paths = 10000;
  double dt = 1e-3;
  ExitRule exit_rule = ExitRule::bridge;
  PathScheme scheme = PathScheme::heun;
  std::uint64_t max_steps = 10'000'000;

  friend bool operator==(const DensityProblem&, const DensityProblem&) = default;
};

struct DensityParams {
  DensityProblem problem;
  double epsilon = 0.1;
  std::vector<double> z0{0.5, 0.0};
  /// Grid points per axis of a finite-difference cross-check (2D boxes); 0 disables it.
  int fd_points = 0;

  friend bool operator==(const DensityParams&, const DensityParams&) = default;
};

struct SweepParams {
  DensityProblem problem;
  std::vector<double> epsilons{0.4, 0.2, 0.1, 0.05};
  std::vector<std::vector<double>> points{{0.3, -0.4}};

  friend bool operator==(const SweepParams&, const SweepParams&) = default;
};

/// Grid block defaults of the condensation experiment: (4,4) cellular start,
/// amplitude 0.01, eps = 1e-6, dt = 0.0025, t = 150.
inline GridRunParams condensation_grid_defaults() {
  GridRunParams g;
  g.dt = 0.0025;
  g.steps = 60000;
  g.epsilon = 1e-6;
  g.snapshot_every = 6000;
  g.write_snapshots = false;
  return g;
}

struct CondensationParams {
  GridRunParams grid = condensation_grid_defaults();
  std::uint64_t seeds = 10;
  double box_psi_max = 0.02;
  std::vector<int> pin_rows{0};
  std::vector<int> pin_columns{0};
  double threshold = 0.5;
  std::uint64_t min_condensed = 8;
  double min_difference = 0.1;

  friend bool operator==(const CondensationParams&, const CondensationParams&) = default;
};

using CommandParams =
    std::variant<SpectralRunParams, GridRunParams, InvarianceParams, DensityParams, SweepParams, CondensationParams>;

struct ExperimentConfig {
  CommandParams params;
  std::uint64_t seed = 0;
  std::string output = "out";
  int workers = 0;

  Command command() const { return static_cast<Command>(params.index()); }
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses and validates a JSON document:
///   {"command": ..., "seed": ..., "output": ..., "workers": ..., "<block>": {...}}
/// with <block> one of spectral, grid, invariance, density, sweep, condensation,
/// matching the command. Unknown keys and every range violation are collected;
/// throws ParseError (syntax, with byte offset) or ValidationError (all issues).
ExperimentConfig parse_config(std::string_view text);

/// Full document with every field written out; parse_config inverts it.
std::string serialize_config(const ExperimentConfig& config);

/// Default config for a command.
ExperimentConfig default_config(Command command);

}  // namespace eulerlab
