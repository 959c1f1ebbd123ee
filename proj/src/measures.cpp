#include "eulerlab/measures.hpp"

#include <cmath>
#include <string>

#include "eulerlab/errors.hpp"

namespace eulerlab {

namespace {

double fd_step(std::span<const double> coords, std::size_t c) {
  // Both coordinates of a mode share the step, scaled by |phi_k|.
  const std::size_t base = c & ~std::size_t{1};
  const double mag = std::hypot(coords[base], coords[base + 1]);
  return 1e-6 * std::max(1.0, mag);
}

void require_measure_modes(const MeasureSpec& m, const SpectralState& s, const char* where) {
  if (!s.mode_set() || !same_modes(*m.mode_set(), *s.mode_set())) {
    throw InvalidArgument(std::string(where) + ": mode-set mismatch");
  }
}

}  // namespace

MeasureSpec MeasureSpec::gaussian(MeasureKind kind, ModeSetPtr modes, std::vector<double> weights) {
  if (!modes) throw InvalidArgument("make_measure: null mode set");
  if (weights.size() != modes->size()) {
    throw InvalidArgument("make_measure: expected " + std::to_string(modes->size()) +
                          " weights, got " + std::to_string(weights.size()));
  }
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw InvalidArgument("make_measure: weight " + std::to_string(i) +
                            " must be finite and nonnegative");
    }
  }
  MeasureSpec m;
  m.kind_ = kind;
  m.modes_ = std::move(modes);
  m.weights_ = std::move(weights);
  return m;
}

MeasureSpec MeasureSpec::custom(ModeSetPtr modes, LogDensity log_density, Gradient gradient) {
  if (!modes) throw InvalidArgument("make_custom_measure: null mode set");
  if (!log_density) throw InvalidArgument("make_custom_measure: empty log-density");
  MeasureSpec m;
  m.kind_ = MeasureKind::custom;
  m.modes_ = std::move(modes);
  m.log_density_ = std::move(log_density);
  m.gradient_ = std::move(gradient);
  return m;
}

double MeasureSpec::log_density(const SpectralState& state) const {
  require_measure_modes(*this, state, "log_density");
  const auto coords = to_real_coords(state);
  return log_density(coords);
}

double MeasureSpec::log_density(std::span<const double> coords) const {
  if (coords.size() != 2 * modes_->size()) throw InvalidArgument("log_density: coordinate count");
  if (kind_ == MeasureKind::custom) return log_density_(coords);
  double s = 0.0;
  for (std::size_t c = 0; c < coords.size(); ++c) s += weights_[c / 2] * coords[c] * coords[c];
  return -0.5 * s;
}

std::vector<double> MeasureSpec::log_density_grad(std::span<const double> coords) const {
  if (coords.size() != 2 * modes_->size()) throw InvalidArgument("log_density_grad: coordinate count");
  if (kind_ != MeasureKind::custom) {
    std::vector<double> g(coords.size());
    for (std::size_t c = 0; c < coords.size(); ++c) g[c] = -weights_[c / 2] * coords[c];
    return g;
  }
  if (gradient_) return gradient_(coords);
  std::vector<double> probe(coords.begin(), coords.end());
  std::vector<double> g(coords.size());
  for (std::size_t c = 0; c < coords.size(); ++c) {
    const double h = fd_step(coords, c);
    probe[c] = coords[c] + h;
    const double up = log_density_(probe);
    probe[c] = coords[c] - h;
    const double down = log_density_(probe);
    probe[c] = coords[c];
    g[c] = (up - down) / (2.0 * h);
  }
  return g;
}

std::vector<double> MeasureSpec::log_density_hess_diag(std::span<const double> coords) const {
  if (kind_ != MeasureKind::custom) {
    std::vector<double> h(coords.size());
    for (std::size_t c = 0; c < coords.size(); ++c) h[c] = -weights_[c / 2];
    return h;
  }
  std::vector<double> probe(coords.begin(), coords.end());
  std::vector<double> out(coords.size());
  for (std::size_t c = 0; c < coords.size(); ++c) {
    // Second differences of the density itself need a coarser step.
    const double step = gradient_ ? fd_step(coords, c) : 100.0 * fd_step(coords, c);
    probe[c] = coords[c] + step;
    const double up = gradient_ ? gradient_(probe)[c] : log_density_(probe);
    probe[c] = coords[c] - step;
    const double down = gradient_ ? gradient_(probe)[c] : log_density_(probe);
    probe[c] = coords[c];
    out[c] = gradient_ ? (up - down) / (2.0 * step)
                       : (up - 2.0 * log_density_(coords) + down) / (step * step);
  }
  return out;
}

MeasureSpec make_measure(MeasureKind kind, const ModeSetPtr& modes) {
  if (!modes) throw InvalidArgument("make_measure: null mode set");
  std::vector<double> w(modes->size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double k2 = (*modes)[i].norm2();
    switch (kind) {
      case MeasureKind::enstrophy_gaussian: w[i] = k2 * k2; break;
      case MeasureKind::energy_gaussian: w[i] = k2; break;
      default:
        throw InvalidArgument("make_measure: use make_weighted_measure / make_custom_measure");
    }
  }
  return MeasureSpec::gaussian(kind, modes, std::move(w));
}

MeasureSpec make_weighted_measure(const ModeSetPtr& modes, std::vector<double> weights) {
  return MeasureSpec::gaussian(MeasureKind::weighted_gaussian, modes, std::move(weights));
}

MeasureSpec make_custom_measure(const ModeSetPtr& modes, MeasureSpec::LogDensity log_density,
                                MeasureSpec::Gradient gradient) {
  return MeasureSpec::custom(modes, std::move(log_density), std::move(gradient));
}

std::vector<double> log_density_grad(const MeasureSpec& measure, const SpectralState& state) {
  require_measure_modes(measure, state, "log_density_grad");
  const auto coords = to_real_coords(state);
  return measure.log_density_grad(coords);
}

OUSpec ou_family(OUFamily kind, const ModeSet& modes) {
  OUSpec ou;
  ou.alpha.resize(modes.size());
  ou.sigma.resize(modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const double k2 = modes[i].norm2();
    ou.alpha[i] = kind == OUFamily::enstrophy ? k2 : 1.0;
    ou.sigma[i] = 1.0 / k2;
  }
  return ou;
}

OUSpec ou_family(std::string_view kind, const ModeSet& modes) {
  if (kind == "enstrophy") return ou_family(OUFamily::enstrophy, modes);
  if (kind == "energy") return ou_family(OUFamily::energy, modes);
  throw InvalidArgument("ou_family: unknown kind '" + std::string(kind) + "'");
}

double im6_residual(const MeasureSpec& measure, const Drift& drift, const SpectralState& state) {
  require_measure_modes(measure, state, "im6_residual");
  const auto coords = to_real_coords(state);
  const auto grad = measure.log_density_grad(coords);
  const auto b = to_real_coords(drift(state));

  double transport = 0.0;
  for (std::size_t c = 0; c < coords.size(); ++c) transport += b[c] * grad[c];

  double divergence = 0.0;
  std::vector<double> probe = coords;
  const auto& modes = state.mode_set();
  for (std::size_t c = 0; c < coords.size(); ++c) {
    const double h = fd_step(coords, c);
    probe[c] = coords[c] + h;
    const double up = to_real_coords(drift(from_real_coords(modes, probe)))[c];
    probe[c] = coords[c] - h;
    const double down = to_real_coords(drift(from_real_coords(modes, probe)))[c];
    probe[c] = coords[c];
    divergence += (up - down) / (2.0 * h);
  }
  return transport + divergence;
}

double sp4_residual(const MeasureSpec& measure, const OUSpec& ou, const SpectralState& state) {
  require_measure_modes(measure, state, "sp4_residual");
  if (ou.alpha.size() != state.size() || ou.sigma.size() != state.size()) {
    throw InvalidArgument("sp4_residual: OU spec size does not match the mode set");
  }
  const auto coords = to_real_coords(state);
  const auto grad = measure.log_density_grad(coords);
  const auto hess = measure.log_density_hess_diag(coords);
  double r = 0.0;
  for (std::size_t c = 0; c < coords.size(); ++c) {
    const double alpha = ou.alpha[c / 2];
    const double sigma = ou.sigma[c / 2];
    const double a = -alpha * coords[c];
    r += a * grad[c] - alpha - sigma * (hess[c] + grad[c] * grad[c]);
  }
  return r;
}

}  // namespace eulerlab
