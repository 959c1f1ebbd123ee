#pragma once

#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "eulerlab/spectral.hpp"

namespace eulerlab {

/// Vector field on z-space: out = b(z).
using ZDrift = std::function<void(std::span<const double> z, std::span<double> out)>;

/// Zero vector field.
ZDrift zero_drift();
/// z -> -b(z).
ZDrift negated(ZDrift b);

/// Bounded domain in z-space: a centered box or a ball around the origin.
class DomainSpec {
 public:
  enum class Shape { box, ball };

  static DomainSpec box(std::vector<double> half_widths);
  static DomainSpec ball(double radius, std::size_t dimension);

  Shape shape() const { return shape_; }
  std::size_t dimension() const { return dim_; }
  const std::vector<double>& half_widths() const { return half_widths_; }
  double radius() const { return radius_; }

  /// Strictly inside.
  bool contains(std::span<const double> z) const;

  /// Point where the segment p -> q (p inside, q not) crosses the boundary,
  /// placed exactly on it.
  std::vector<double> crossing(std::span<const double> p, std::span<const double> q) const;

  /// Deterministic boundary points for extrema checks (faces or circle).
  std::vector<std::vector<double>> boundary_samples(std::size_t per_face) const;

 private:
  Shape shape_ = Shape::box;
  std::size_t dim_ = 0;
  std::vector<double> half_widths_;
  double radius_ = 0.0;
};

/// Dirichlet data f on the boundary.
class BoundaryFunction {
 public:
  enum class Kind { constant, enstrophy_gaussian, coordinate, custom };
  using Fn = std::function<double(std::span<const double>)>;

  static BoundaryFunction constant(double c);
  static BoundaryFunction coordinate(std::size_t index);
  /// f = exp(-1/2 sum k^4 |phi_k|^2) at the state defined by `embed(z)`.
  static BoundaryFunction enstrophy_gaussian(std::function<SpectralState(std::span<const double>)> embed);
  static BoundaryFunction custom(Fn fn);

  Kind kind() const { return kind_; }
  double operator()(std::span<const double> z) const { return fn_(z); }

 private:
  Kind kind_ = Kind::constant;
  Fn fn_;
};

/// Two-dimensional slice of the z-dynamics: selected real z-coordinates are
/// free, every other coordinate is pinned to a background state. The reduced
/// drift is the projection of B' = |k| B(phi(z)) onto the free coordinates.
/// B' is quadratic, so the slice drift is stored exactly as c + L z + Q(z, z).
class ReducedSystem {
 public:
  struct FreeCoordinate {
    ModeIndex mode;
    bool imaginary = false;
  };

  ReducedSystem(ModeSetPtr modes, SpectralState background_z, std::vector<FreeCoordinate> free);

  std::size_t dimension() const { return free_index_.size(); }
  const ModeSetPtr& mode_set() const { return modes_; }

  /// Full z-state with the free coordinates replaced by `z`.
  SpectralState embed(std::span<const double> z) const;
  /// Projected drift evaluated through euler_drift (reference path).
  std::vector<double> drift_direct(std::span<const double> z) const;
  /// Same field from the stored quadratic form.
  void drift(std::span<const double> z, std::span<double> out) const;

  ZDrift field() const;
  BoundaryFunction enstrophy_boundary() const;

 private:
  ModeSetPtr modes_;
  SpectralState background_;
  std::vector<std::size_t> free_index_;  // positions in the real-coordinate vector
  std::vector<double> c_, l_, q_;       // q_ is d x d x d, symmetric in the last two
};

/// Real parts of (1,0) and (0,1) free, all other modes zero except a real
/// spectator phi_(1,1) = spectator. With phi_(1,1) = c the slice drift is the
/// rotation 4 pi^2 c (-z_2, z_1); c = 0 gives the zero field.
ReducedSystem two_mode_reduction(double spectator = 1.0 / (4.0 * std::numbers::pi * std::numbers::pi));

struct DensityEstimate {
  double value = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(paths)
  std::uint64_t paths = 0;  // paths that exited
  double mean_exit_time = 0.0;
  std::uint64_t max_steps_hit = 0;

  bool flagged() const { return max_steps_hit > 0; }
};

enum class ExitRule {
  /// Discrete crossing, linear interpolation onto the boundary.
  interpolate,
  /// Also tests for an excursion between two inside points with the
  /// Brownian-bridge crossing probability (box faces and the ball only).
  bridge,
};

enum class PathScheme {
  euler_maruyama,
  /// Stochastic Heun: drift averaged over the step and an Euler predictor
  /// with the same noise increment. Removes the O(dt) energy pumping of
  /// explicit Euler on rotational fields.
  heun,
};

struct EstimateOptions {
  std::uint64_t max_steps = 10'000'000;
  ExitRule exit_rule = ExitRule::bridge;
  PathScheme scheme = PathScheme::heun;
  int workers = 0;  // 0: environment default
};

/// Exit-time Monte Carlo for R(z0) = E f(z(tau)), dz = b dt + sqrt(2 eps) dW.
/// R solves b . grad R + eps Laplacian R = 0; the density equation
/// B' . grad R - eps Laplacian R = 0 therefore takes b = -B'.
/// Path p uses noise stream p; results do not depend on the worker count.
DensityEstimate estimate_density(const ZDrift& drift, double epsilon, const DomainSpec& domain,
                                 const BoundaryFunction& boundary, std::span<const double> z0,
                                 std::uint64_t paths, double dt, std::uint64_t seed,
                                 const EstimateOptions& options = {});

struct SweepEntry {
  double epsilon = 0.0;
  double dt = 0.0;
  std::vector<double> z;
  DensityEstimate estimate;
};

struct SweepDifference {
  std::size_t point = 0;
  double epsilon_from = 0.0;
  double epsilon_to = 0.0;
  double difference = 0.0;  // |R(eps_to) - R(eps_from)|
  double std_error = 0.0;   // combined, independent-sample bound
};

struct SweepResult {
  std::vector<SweepEntry> entries;  // epsilon-major, then point
  std::vector<SweepDifference> differences;
};

/// Runs estimate_density over all (epsilon, point) pairs. The time step is
/// dt0 * min(1, eps / eps_first); every epsilon reuses the same seed.
SweepResult epsilon_sweep(const ZDrift& drift, const DomainSpec& domain, const BoundaryFunction& boundary,
                          const std::vector<std::vector<double>>& points,
                          const std::vector<double>& epsilons, std::uint64_t paths, double dt0,
                          std::uint64_t seed, const EstimateOptions& options = {});

}  // namespace eulerlab
