#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "eulerlab/grid_field.hpp"
#include "eulerlab/mode_set.hpp"

namespace eulerlab {

using Complex = std::complex<double>;

/// Fourier amplitudes phi_k of a real stream function, one per mode of the
/// half lattice. The amplitude of -k is the conjugate of the stored one.
class SpectralState {
 public:
  SpectralState() = default;
  explicit SpectralState(ModeSetPtr modes);
  SpectralState(ModeSetPtr modes, std::vector<Complex> amps);

  const ModeSetPtr& mode_set() const { return modes_; }
  std::size_t size() const { return amps_.size(); }

  Complex& operator[](std::size_t i) { return amps_[i]; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }

  std::span<Complex> amps() { return amps_; }
  std::span<const Complex> amps() const { return amps_; }

  /// phi at any lattice vector: conjugate for -k, zero outside the set.
  Complex amplitude(ModeIndex k) const;
  void set(ModeIndex k, Complex value);

  bool all_finite() const;
  double max_abs() const;

  SpectralState& operator+=(const SpectralState& o);
  SpectralState& operator-=(const SpectralState& o);
  SpectralState& operator*=(double c);

  friend SpectralState operator+(SpectralState a, const SpectralState& b) { return a += b; }
  friend SpectralState operator-(SpectralState a, const SpectralState& b) { return a -= b; }
  friend SpectralState operator*(double c, SpectralState a) { return a *= c; }

  /// Same mode set (by identity or by content) and equal amplitudes.
  friend bool operator==(const SpectralState& a, const SpectralState& b);

 private:
  ModeSetPtr modes_;
  std::vector<Complex> amps_;
};

bool same_modes(const ModeSet& a, const ModeSet& b);
void require_same_modes(const SpectralState& a, const SpectralState& b, const char* where);

/// Real coordinates (Re phi_0, Im phi_0, Re phi_1, ...).
std::vector<double> to_real_coords(const SpectralState& s);
SpectralState from_real_coords(const ModeSetPtr& modes, std::span<const double> coords);

using Drift = std::function<SpectralState(const SpectralState&)>;

/// Galerkin-truncated Euler vector field
///   B_k = (4 pi^2 / k^2) sum_h (k_perp . h) (k - h)^2 phi_h phi_{k-h}
/// over all h with h, k - h in the truncated full lattice.
SpectralState euler_drift(const SpectralState& state);

/// d Re B_k / d Re phi_k + d Im B_k / d Im phi_k per mode, by centered
/// differences with step 1e-6 * max(1, |phi_k|).
std::vector<double> drift_divergence(const SpectralState& state, const Drift& drift = euler_drift);

/// E = 1/2 sum k^2 |phi_k|^2
double energy(const SpectralState& state);
/// S = 1/2 sum k^4 |phi_k|^2
double enstrophy(const SpectralState& state);
/// (sum |k|^{2 beta} |phi_k|^2)^{1/2}
double sobolev_norm(const SpectralState& state, double beta);

enum class FieldKind { stream, vorticity };

/// psi(x) = sum_k phi_k e^{i 2 pi k.x} + c.c. on a resolution^2 grid. The
/// vorticity option multiplies mode k by -4 pi^2 k^2. Requires
/// resolution >= 2 * max_component + 1.
GridField synthesize_grid(const SpectralState& state, int resolution,
                          FieldKind field = FieldKind::stream);

/// Discrete Fourier coefficients of a real grid on the retained modes.
SpectralState analyze_grid(const GridField& grid, const ModeSetPtr& modes);

/// Grid average of f(omega), omega = Laplacian of psi synthesized at `resolution`.
double casimir(const SpectralState& state, const std::function<double(double)>& f,
               int resolution);

}  // namespace eulerlab
