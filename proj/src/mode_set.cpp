#include "eulerlab/mode_set.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "eulerlab/errors.hpp"

namespace eulerlab {

ModeSetPtr ModeSet::build(int N) {
  if (N < 1) throw InvalidArgument("build_mode_set: N must be >= 1, got " + std::to_string(N));
  std::vector<ModeIndex> modes;
  for (int k1 = 0; k1 <= N; ++k1) {
    for (int k2 = -N; k2 <= N; ++k2) {
      const ModeIndex k{k1, k2};
      if (k.in_half_lattice() && k.norm2() <= N * N) modes.push_back(k);
    }
  }
  return ModeSetPtr(new ModeSet(std::move(modes), N));
}

ModeSetPtr ModeSet::from_modes(std::vector<ModeIndex> modes) {
  int truncation = 0;
  for (const auto& k : modes) {
    if (!k.in_half_lattice()) {
      throw InvalidArgument("ModeSet: mode (" + std::to_string(k.k1) + "," + std::to_string(k.k2) +
                            ") is not in the half lattice");
    }
    truncation = std::max(truncation, static_cast<int>(std::ceil(std::sqrt(double(k.norm2())))));
  }
  return ModeSetPtr(new ModeSet(std::move(modes), truncation));
}

ModeSet::ModeSet(std::vector<ModeIndex> modes, int truncation) : truncation_(truncation) {
  std::sort(modes.begin(), modes.end());
  modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
  modes_ = std::move(modes);

  norms_.reserve(modes_.size());
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const auto& k = modes_[i];
    index_of_.emplace(k, i);
    norms_.push_back(std::sqrt(double(k.norm2())));
    max_component_ = std::max({max_component_, std::abs(k.k1), std::abs(k.k2)});
  }

  // Interaction table. For every stored output mode k, every unordered pair
  // {h, m} of full-lattice vectors with h + m = k whose legs resolve into the
  // set contributes (k_perp . h) m^2 + (k_perp . m) h^2 = (k_perp . h)(m^2 - h^2).
  const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
  std::vector<ModeIndex> lattice;
  lattice.reserve(2 * modes_.size());
  for (const auto& k : modes_) {
    lattice.push_back(k);
    lattice.push_back(-k);
  }
  for (std::size_t out = 0; out < modes_.size(); ++out) {
    const ModeIndex k = modes_[out];
    const ModeIndex k_perp{-k.k2, k.k1};
    for (const auto& h : lattice) {
      const ModeIndex m = k - h;
      if (!(h < m)) continue;
      const auto hs = slot_of(h);
      const auto ms = slot_of(m);
      if (!hs || !ms) continue;
      const long long dot = static_cast<long long>(k_perp.k1) * h.k1 +
                            static_cast<long long>(k_perp.k2) * h.k2;
      const long long weight = dot * (m.norm2() - h.norm2());
      if (weight == 0) continue;
      triads_.push_back(Triad{static_cast<std::uint32_t>(out), *hs, *ms,
                              four_pi2 * static_cast<double>(weight) / k.norm2()});
    }
  }
}

std::optional<std::size_t> ModeSet::index_of(ModeIndex k) const {
  const auto it = index_of_.find(k);
  if (it == index_of_.end()) return std::nullopt;
  return it->second;
}

std::optional<LatticeSlot> ModeSet::slot_of(ModeIndex k) const {
  if (k.k1 == 0 && k.k2 == 0) return std::nullopt;
  const bool conj = !k.in_half_lattice();
  const auto idx = index_of(conj ? -k : k);
  if (!idx) return std::nullopt;
  return LatticeSlot{static_cast<std::uint32_t>(*idx), conj};
}

ModeSetPtr build_mode_set(int N) { return ModeSet::build(N); }

}  // namespace eulerlab
