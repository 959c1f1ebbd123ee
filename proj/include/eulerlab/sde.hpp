#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "eulerlab/measures.hpp"
#include "eulerlab/rng.hpp"
#include "eulerlab/spectral.hpp"

namespace eulerlab {

enum class NoiseProfile { uniform, inverse_k2, custom };

/// Additive noise sqrt(2 eps sigma_k) db_k on every mode. b_k is a complex
/// Brownian motion whose real and imaginary parts each have variance 1/2 per
/// unit time, so E|b_k(t)|^2 = t.
struct NoiseSpec {
  double epsilon = 0.0;
  std::vector<double> sigma;

  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

/// uniform: sigma_k = 1; inverse_k2: sigma_k = 1/k^2; custom: `custom_sigma`.
NoiseSpec make_noise(double epsilon, NoiseProfile profile, const ModeSet& modes,
                     std::vector<double> custom_sigma = {});

/// strang: exact OU half step, RK4 step of the Euler drift, exact OU half step.
/// Without an OU term the stochastic part is the plain additive increment.
enum class Scheme { rk4, euler_maruyama, strang };

struct SimConfig {
  double dt = 1e-3;
  std::uint64_t steps = 1000;
  std::uint64_t seed = 0;
  std::uint64_t record_every = 100;
  Scheme scheme = Scheme::rk4;
  /// Noise stream index (ensemble member); keeps members independent under one seed.
  std::uint32_t stream = 0;
};

struct EulerOnly {};
struct EulerPlusOU {
  OUSpec ou;
};
/// Deterministic part of the perturbed dynamics: B, or B + eps a with a_k = -alpha_k phi_k.
using DriftKind = std::variant<EulerOnly, EulerPlusOU>;

struct Trajectory {
  std::vector<std::uint64_t> steps;
  std::vector<double> times;
  std::vector<SpectralState> states;
  std::vector<double> energy;
  std::vector<double> enstrophy;
};

/// Blow-up threshold on any |phi_k|.
inline constexpr double kBlowUpAmplitude = 1e8;

/// Classical fourth-order Runge-Kutta step of d phi/dt = drift(phi).
SpectralState rk4_step(const SpectralState& state, double dt, const Drift& drift = euler_drift);

/// Explicit Euler step phi + dt drift(phi).
SpectralState euler_step(const SpectralState& state, double dt, const Drift& drift = euler_drift);

/// Euler-Maruyama step
///   phi_k <- phi_k + [B_k + eps a_k] dt + sqrt(2 eps sigma_k dt) eta_k,
/// eta_k complex normal with Re and Im independent of variance 1/2. The draw
/// for mode k at `step` is addressed by (stream, step, k).
SpectralState em_step(const SpectralState& state, const DriftKind& drift, const NoiseSpec& noise,
                      double dt, const NoiseStream& rng, std::uint64_t step);

/// Same step with an arbitrary deterministic vector field.
SpectralState em_step(const SpectralState& state, const Drift& drift, const NoiseSpec& noise,
                      double dt, const NoiseStream& rng, std::uint64_t step);

/// Strang splitting step. The linear part d phi = -eps alpha phi dt + sqrt(2 eps sigma) db
/// is integrated exactly over dt/2 on each side of an RK4 step of B, so the
/// OU-perturbed Gaussian is preserved up to the RK4 error in B alone.
SpectralState strang_step(const SpectralState& state, const DriftKind& drift, const NoiseSpec& noise,
                          double dt, const NoiseStream& rng, std::uint64_t step);

/// Drift function (B, or B + eps a) for a drift kind at noise level eps.
Drift make_drift(const DriftKind& drift, double epsilon);

/// Integrate from `initial`, recording step 0, every `record_every` steps and
/// the final step. Throws BlowUpError on a non-finite state or any
/// |phi_k| > kBlowUpAmplitude, InvalidArgument on a bad configuration.
Trajectory simulate(const SpectralState& initial, const SimConfig& config,
                    const DriftKind& drift = EulerOnly{}, const NoiseSpec& noise = {});

/// Final states of an ensemble; member i uses noise stream i. Results are
/// independent of the worker count.
std::vector<SpectralState> evolve_ensemble(const std::vector<SpectralState>& initials,
                                           const SimConfig& config, const DriftKind& drift,
                                           const NoiseSpec& noise, int workers = 1);

/// z_k = |k| phi_k, which maps sigma_k = 1/k^2 noise onto uniform noise.
SpectralState to_z_coordinates(const SpectralState& phi);
SpectralState from_z_coordinates(const SpectralState& z);
/// B'_k(z) = |k| B_k(phi(z)).
SpectralState z_drift(const SpectralState& z);

/// Independent complex normal per mode with Var(Re) = Var(Im) = 1/(2 w_k),
/// addressed by (stream, sample, mode). Gaussian measures with all w_k > 0 only.
SpectralState sample_gaussian(const MeasureSpec& measure, const NoiseStream& rng,
                              std::uint64_t sample = 0);

}  // namespace eulerlab
