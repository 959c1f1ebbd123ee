#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "eulerlab/grid_field.hpp"
#include "eulerlab/rng.hpp"

namespace eulerlab {

/// Periodic 5-point Laplacian with spacing 1/n.
GridField laplacian_apply(const GridField& field);

/// Eigenvalue of laplacian_apply for the discrete Fourier mode (k1, k2).
double laplacian_eigenvalue(int n, int k1, int k2);

/// Zero-mean psi with laplacian_apply(psi) = omega, by FFT diagonalization.
/// Throws InvalidArgument if |sum omega| > 1e-10 n^2.
GridField poisson_invert(const GridField& omega);

/// Arakawa Jacobian J(psi, omega) = (J++ + J+x + Jx+) / 3, the discrete
/// u . grad omega with u = (-d2 psi, d1 psi). For fixed psi the map
/// omega -> J(psi, omega) is skew-symmetric, sums to zero, and vanishes on
/// omega = c psi.
GridField advection_apply(const GridField& psi, const GridField& omega);

struct CayleyStats {
  int iterations = 0;
  double residual = 0.0;  // relative, ||b - A x|| / ||b||
};

/// Crank-Nicolson (Cayley) step with M = J(psi, .) frozen at psi = poisson_invert(omega):
/// (I + dt/2 M) omega' = (I - dt/2 M) omega, solved by CG on the normal
/// equations to relative residual `tolerance`, warm-started at omega.
GridField cayley_step(const GridField& omega, double dt, CayleyStats* stats = nullptr,
                      double tolerance = 1e-12);

/// Same step with M frozen at a caller-supplied stream function.
GridField cayley_step_frozen(const GridField& omega, const GridField& psi_frozen, double dt,
                             CayleyStats* stats = nullptr, double tolerance = 1e-12);

/// omega + sqrt(2 eps dt) eta, eta i.i.d. N(0, 1), then the mean is removed.
/// Cells 2p and 2p + 1 use draw p at `step`.
GridField inject_noise(const GridField& omega, double epsilon, double dt, const NoiseStream& rng,
                       std::uint64_t step);

struct GridConstraint {
  enum class Kind { none, box, pinning };
  Kind kind = Kind::none;
  double psi_max = 0.0;
  std::vector<int> rows;
  std::vector<int> columns;

  static GridConstraint none() { return {}; }
  static GridConstraint box(double psi_max);
  static GridConstraint pinning(std::vector<int> rows, std::vector<int> columns = {});

  std::string describe() const;

  friend bool operator==(const GridConstraint&, const GridConstraint&) = default;
};

/// Projects psi onto {constraint holds, sum psi = 0}.
///   box: psi_ij <- clip(psi_ij - mu, -psi_max, psi_max), mu chosen so the
///        result sums to zero (the Euclidean projection onto that set).
///   pinning: listed rows and columns become exactly 0. The projection is
///        orthogonal in the energy product <a, -Laplacian b>: the change is
///        Laplacian^-1 of a vorticity sheet carried by the pinned cells, so
///        omega is modified only on the lines. Zeroing the lines directly
///        feeds enstrophy into the flow and the runs blow up.
GridField apply_constraint(const GridField& psi, const GridConstraint& constraint);

/// Whether psi satisfies the constraint (box within `slack`, pinned lines exactly 0).
bool satisfies(const GridField& psi, const GridConstraint& constraint, double slack = 0.0);

/// Energy by |k| shells, shell s covering s <= |k| < s + 1, wavevectors in
/// [-n/2, n/2)^2 and energy k^2 |psi_hat_k|^2 with psi_hat = DFT / n^2.
struct SpectrumReport {
  std::vector<double> shell_lower;  // s
  std::vector<double> shell_energy;
  double total_energy = 0.0;
  /// Share of shell 1, i.e. |k| in {1, sqrt 2}.
  double lowest_shell_fraction = 0.0;
};

SpectrumReport shell_spectrum(const GridField& psi);

/// 1/2 mean(omega^2) with omega = laplacian_apply(psi).
double grid_enstrophy(const GridField& psi);

/// How run_grid_sim freezes M(psi) in the Cayley solve.
enum class GridStepper {
  /// M(psi_n): one linear solve per step. Enstrophy is exact, energy drifts
  /// upward at a rate proportional to dt.
  frozen,
  /// M at the stream function of (omega_n + omega*) / 2, omega* the frozen
  /// predictor: two linear solves, enstrophy exact, energy drift O(dt^2).
  midpoint,
};

struct GridSimConfig {
  int n = 32;
  double dt = 1e-3;
  std::uint64_t steps = 1000;
  double epsilon = 0.0;
  GridConstraint constraint;
  std::uint64_t seed = 0;
  std::uint64_t snapshot_every = 100;
  GridStepper stepper = GridStepper::frozen;

  friend bool operator==(const GridSimConfig&, const GridSimConfig&) = default;
};

struct GridSnapshot {
  std::uint64_t step = 0;
  double t = 0.0;
  GridField psi;
  SpectrumReport spectrum;
  double enstrophy = 0.0;
};

struct GridSimResult {
  std::vector<GridSnapshot> snapshots;
  GridField final_psi;
  int max_solver_iterations = 0;
};

/// Each step: omega = laplacian(psi); Cayley step (see GridStepper); noise; psi = poisson_invert(omega);
/// constraint. The constraint is also applied to the initial field. Snapshots at
/// step 0, every snapshot_every steps and the last step. `on_snapshot`, when given,
/// receives each snapshot and the result keeps none of them.
/// Throws BlowUpError when |psi| exceeds 1e8 or turns non-finite.
GridSimResult run_grid_sim(const GridField& initial_psi, const GridSimConfig& config,
                           const std::function<void(const GridSnapshot&)>& on_snapshot = {});

/// amplitude * cos(2 pi (k1 i + k2 j) / n)
GridField plane_wave(int n, int k1, int k2, double amplitude);
/// amplitude * cos(2 pi k1 i / n) cos(2 pi k2 j / n): the (k1, k2)-class cellular eigenfield.
GridField cellular_mode(int n, int k1, int k2, double amplitude);

}  // namespace eulerlab
