#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "eulerlab/spectral.hpp"

namespace eulerlab::test {

/// Complex normal amplitudes, scaled by `scale / |k|^decay`.
inline SpectralState random_state(const ModeSetPtr& modes, std::mt19937_64& gen,
                                  double scale = 1.0, double decay = 0.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralState s(modes);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = scale / std::pow(modes->norms()[i], decay);
    s[i] = {f * normal(gen), f * normal(gen)};
  }
  return s;
}

/// Reference convolution: every ordered pair (h, k - h) of the full truncated
/// lattice, amplitudes of -m taken as conjugates, no precomputed tables.
inline SpectralState brute_force_drift(const SpectralState& s) {
  const auto& modes = *s.mode_set();
  const int N = modes.truncation();
  const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
  auto amp = [&](int a, int b) -> std::complex<double> {
    if (a == 0 && b == 0) return {};
    ModeIndex k{a, b};
    if (k.in_half_lattice()) {
      auto i = modes.index_of(k);
      return i ? s[*i] : std::complex<double>{};
    }
    auto i = modes.index_of(-k);
    return i ? std::conj(s[*i]) : std::complex<double>{};
  };
  SpectralState out(s.mode_set());
  for (std::size_t idx = 0; idx < modes.size(); ++idx) {
    const auto k = modes[idx];
    std::complex<double> acc{};
    for (int h1 = -N; h1 <= N; ++h1) {
      for (int h2 = -N; h2 <= N; ++h2) {
        const int m1 = k.k1 - h1, m2 = k.k2 - h2;
        const double cross = -k.k2 * h1 + k.k1 * h2;
        acc += cross * double(m1 * m1 + m2 * m2) * amp(h1, h2) * amp(m1, m2);
      }
    }
    out[idx] = four_pi2 / k.norm2() * acc;
  }
  return out;
}

}  // namespace eulerlab::test
