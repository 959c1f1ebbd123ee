#include "eulerlab/spectral.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "eulerlab/errors.hpp"

namespace eulerlab {

namespace {

constexpr double kFourPi2 = 4.0 * std::numbers::pi * std::numbers::pi;

Complex fetch(std::span<const Complex> amps, LatticeSlot s) {
  return s.conjugate ? std::conj(amps[s.index]) : amps[s.index];
}

void require_resolution(const ModeSet& modes, int resolution, const char* where) {
  const int needed = 2 * modes.max_component() + 1;
  if (resolution < needed) {
    throw InvalidArgument(std::string(where) + ": resolution " + std::to_string(resolution) +
                          " below unaliased minimum " + std::to_string(needed));
  }
}

// cos/sin of 2 pi q / n for q in [0, n); phases are reduced exactly in integers.
struct PhaseTable {
  explicit PhaseTable(int n) : n(n), c(n), s(n) {
    for (int q = 0; q < n; ++q) {
      const double a = 2.0 * std::numbers::pi * q / n;
      c[q] = std::cos(a);
      s[q] = std::sin(a);
    }
  }
  int reduce(long long q) const { return static_cast<int>(((q % n) + n) % n); }

  int n;
  std::vector<double> c, s;
};

}  // namespace

SpectralState::SpectralState(ModeSetPtr modes) : modes_(std::move(modes)) {
  if (!modes_) throw InvalidArgument("SpectralState: null mode set");
  amps_.assign(modes_->size(), Complex{});
}

SpectralState::SpectralState(ModeSetPtr modes, std::vector<Complex> amps)
    : modes_(std::move(modes)), amps_(std::move(amps)) {
  if (!modes_) throw InvalidArgument("SpectralState: null mode set");
  if (amps_.size() != modes_->size()) {
    throw InvalidArgument("SpectralState: " + std::to_string(amps_.size()) +
                          " amplitudes for a mode set of size " + std::to_string(modes_->size()));
  }
}

Complex SpectralState::amplitude(ModeIndex k) const {
  const auto slot = modes_->slot_of(k);
  if (!slot) return {};
  return fetch(amps_, *slot);
}

void SpectralState::set(ModeIndex k, Complex value) {
  const auto slot = modes_->slot_of(k);
  if (!slot) {
    throw InvalidArgument("SpectralState::set: mode (" + std::to_string(k.k1) + "," +
                          std::to_string(k.k2) + ") not in the mode set");
  }
  amps_[slot->index] = slot->conjugate ? std::conj(value) : value;
}

bool SpectralState::all_finite() const {
  for (const auto& a : amps_) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) return false;
  }
  return true;
}

double SpectralState::max_abs() const {
  double m = 0.0;
  for (const auto& a : amps_) m = std::max(m, std::abs(a));
  return m;
}

SpectralState& SpectralState::operator+=(const SpectralState& o) {
  require_same_modes(*this, o, "SpectralState::operator+=");
  for (std::size_t i = 0; i < amps_.size(); ++i) amps_[i] += o.amps_[i];
  return *this;
}

SpectralState& SpectralState::operator-=(const SpectralState& o) {
  require_same_modes(*this, o, "SpectralState::operator-=");
  for (std::size_t i = 0; i < amps_.size(); ++i) amps_[i] -= o.amps_[i];
  return *this;
}

SpectralState& SpectralState::operator*=(double c) {
  for (auto& a : amps_) a *= c;
  return *this;
}

bool operator==(const SpectralState& a, const SpectralState& b) {
  if (!a.modes_ || !b.modes_) return a.modes_ == b.modes_ && a.amps_ == b.amps_;
  return same_modes(*a.modes_, *b.modes_) && a.amps_ == b.amps_;
}

bool same_modes(const ModeSet& a, const ModeSet& b) {
  return &a == &b || a.modes() == b.modes();
}

void require_same_modes(const SpectralState& a, const SpectralState& b, const char* where) {
  if (!a.mode_set() || !b.mode_set() || !same_modes(*a.mode_set(), *b.mode_set())) {
    throw InvalidArgument(std::string(where) + ": mode-set mismatch");
  }
}

std::vector<double> to_real_coords(const SpectralState& s) {
  std::vector<double> out;
  out.reserve(2 * s.size());
  for (const auto& a : s.amps()) {
    out.push_back(a.real());
    out.push_back(a.imag());
  }
  return out;
}

SpectralState from_real_coords(const ModeSetPtr& modes, std::span<const double> coords) {
  if (coords.size() != 2 * modes->size()) {
    throw InvalidArgument("from_real_coords: expected " + std::to_string(2 * modes->size()) +
                          " coordinates, got " + std::to_string(coords.size()));
  }
  SpectralState s(modes);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = {coords[2 * i], coords[2 * i + 1]};
  return s;
}

SpectralState euler_drift(const SpectralState& state) {
  const auto& modes = *state.mode_set();
  SpectralState out(state.mode_set());
  const auto amps = state.amps();
  for (const auto& t : modes.triads()) {
    out[t.out] += t.coef * (fetch(amps, t.h) * fetch(amps, t.m));
  }
  return out;
}

std::vector<double> drift_divergence(const SpectralState& state, const Drift& drift) {
  std::vector<double> div(state.size(), 0.0);
  SpectralState probe = state;
  for (std::size_t k = 0; k < state.size(); ++k) {
    const Complex base = state[k];
    const double h = 1e-6 * std::max(1.0, std::abs(base));

    probe[k] = base + Complex(h, 0.0);
    const double re_plus = drift(probe)[k].real();
    probe[k] = base - Complex(h, 0.0);
    const double re_minus = drift(probe)[k].real();
    probe[k] = base + Complex(0.0, h);
    const double im_plus = drift(probe)[k].imag();
    probe[k] = base - Complex(0.0, h);
    const double im_minus = drift(probe)[k].imag();
    probe[k] = base;

    div[k] = (re_plus - re_minus) / (2.0 * h) + (im_plus - im_minus) / (2.0 * h);
  }
  return div;
}

double energy(const SpectralState& state) {
  const auto& modes = state.mode_set()->modes();
  double e = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) e += modes[i].norm2() * std::norm(state[i]);
  return 0.5 * e;
}

double enstrophy(const SpectralState& state) {
  const auto& modes = state.mode_set()->modes();
  double s = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double k2 = modes[i].norm2();
    s += k2 * k2 * std::norm(state[i]);
  }
  return 0.5 * s;
}

double sobolev_norm(const SpectralState& state, double beta) {
  const auto& modes = state.mode_set()->modes();
  double s = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    s += std::pow(double(modes[i].norm2()), beta) * std::norm(state[i]);
  }
  return std::sqrt(s);
}

GridField synthesize_grid(const SpectralState& state, int resolution, FieldKind field) {
  const auto& modes = *state.mode_set();
  require_resolution(modes, resolution, "synthesize_grid");
  const PhaseTable phase(resolution);

  std::vector<Complex> coeff(state.size());
  for (std::size_t m = 0; m < state.size(); ++m) {
    const double scale = field == FieldKind::vorticity ? -kFourPi2 * modes[m].norm2() : 1.0;
    coeff[m] = scale * state[m];
  }

  GridField grid(resolution);
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      double v = 0.0;
      for (std::size_t m = 0; m < state.size(); ++m) {
        const auto& k = modes[m];
        const int q = phase.reduce(static_cast<long long>(k.k1) * i + static_cast<long long>(k.k2) * j);
        // 2 Re(c e^{i theta})
        v += 2.0 * (coeff[m].real() * phase.c[q] - coeff[m].imag() * phase.s[q]);
      }
      grid(i, j) = v;
    }
  }
  return grid;
}

SpectralState analyze_grid(const GridField& grid, const ModeSetPtr& modes) {
  const int n = grid.n();
  require_resolution(*modes, n, "analyze_grid");
  const PhaseTable phase(n);
  SpectralState out(modes);
  const double inv = 1.0 / (double(n) * n);
  for (std::size_t m = 0; m < modes->size(); ++m) {
    const auto& k = (*modes)[m];
    double re = 0.0;
    double im = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const int q = phase.reduce(static_cast<long long>(k.k1) * i + static_cast<long long>(k.k2) * j);
        re += grid(i, j) * phase.c[q];
        im -= grid(i, j) * phase.s[q];
      }
    }
    out[m] = {re * inv, im * inv};
  }
  return out;
}

double casimir(const SpectralState& state, const std::function<double(double)>& f,
               int resolution) {
  const GridField omega = synthesize_grid(state, resolution, FieldKind::vorticity);
  double s = 0.0;
  for (double w : omega.values()) s += f(w);
  return s / double(omega.size());
}

}  // namespace eulerlab
