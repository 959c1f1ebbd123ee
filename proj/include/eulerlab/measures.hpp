#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "eulerlab/spectral.hpp"

namespace eulerlab {

enum class MeasureKind { enstrophy_gaussian, energy_gaussian, weighted_gaussian, custom };

/// Unnormalized density R(phi) = exp(log_density(phi)) over the real
/// coordinates (Re phi_k, Im phi_k).
///
/// Gaussian kinds have log R = -1/2 sum_k w_k |phi_k|^2, with w_k = k^4
/// (enstrophy) or w_k = k^2 (energy; the renormalization constant of the
/// Wick-ordered energy is dropped since it only shifts log R).
class MeasureSpec {
 public:
  using LogDensity = std::function<double(std::span<const double>)>;
  using Gradient = std::function<std::vector<double>(std::span<const double>)>;

  MeasureKind kind() const { return kind_; }
  const ModeSetPtr& mode_set() const { return modes_; }
  bool is_gaussian() const { return kind_ != MeasureKind::custom; }

  /// Per-mode weights; empty for custom measures.
  const std::vector<double>& weights() const { return weights_; }

  double log_density(const SpectralState& state) const;
  double log_density(std::span<const double> coords) const;

  /// Gradient of log R over real coordinates.
  std::vector<double> log_density_grad(std::span<const double> coords) const;

  /// d^2 log R / d c^2 for every real coordinate c (diagonal of the Hessian).
  std::vector<double> log_density_hess_diag(std::span<const double> coords) const;

  static MeasureSpec gaussian(MeasureKind kind, ModeSetPtr modes, std::vector<double> weights);
  static MeasureSpec custom(ModeSetPtr modes, LogDensity log_density, Gradient gradient = {});

 private:
  MeasureKind kind_ = MeasureKind::weighted_gaussian;
  ModeSetPtr modes_;
  std::vector<double> weights_;
  LogDensity log_density_;
  Gradient gradient_;
};

/// enstrophy / energy gaussian with the standard weights.
MeasureSpec make_measure(MeasureKind kind, const ModeSetPtr& modes);
/// weighted_gaussian with explicit nonnegative weights.
MeasureSpec make_weighted_measure(const ModeSetPtr& modes, std::vector<double> weights);
/// R = exp(log_density), optional analytic gradient (finite differences otherwise).
MeasureSpec make_custom_measure(const ModeSetPtr& modes, MeasureSpec::LogDensity log_density,
                                MeasureSpec::Gradient gradient = {});

/// Throws InvalidArgument on mode-set mismatch.
std::vector<double> log_density_grad(const MeasureSpec& measure, const SpectralState& state);

/// Ornstein-Uhlenbeck perturbation with drift a_k = -alpha_k phi_k and
/// state-independent diffusion coefficient sigma_k.
struct OUSpec {
  std::vector<double> alpha;
  std::vector<double> sigma;

  friend bool operator==(const OUSpec&, const OUSpec&) = default;
};

enum class OUFamily { enstrophy, energy };

/// enstrophy: alpha = k^2, sigma = 1/k^2.  energy: alpha = 1, sigma = 1/k^2.
OUSpec ou_family(OUFamily kind, const ModeSet& modes);
/// Name-based variant ("enstrophy" / "energy"); unknown names raise InvalidArgument.
OUSpec ou_family(std::string_view kind, const ModeSet& modes);

/// Infinitesimal-invariance residual for a first-order generator:
///   (1/R) sum_c d(R b_c)/dc = sum_c [b_c d log R/dc + d b_c/dc]
/// over real coordinates, drift derivatives by centered differences.
double im6_residual(const MeasureSpec& measure, const Drift& drift, const SpectralState& state);

/// Invariance residual of an OU perturbation with constant sigma (divided by R):
///   sum_c [a_c dlogR/dc + da_c/dc - sigma_c (d2logR/dc2 + (dlogR/dc)^2)].
double sp4_residual(const MeasureSpec& measure, const OUSpec& ou, const SpectralState& state);

}  // namespace eulerlab
