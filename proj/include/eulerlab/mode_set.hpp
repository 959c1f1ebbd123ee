#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace eulerlab {

/// Lattice wavevector (k1, k2).
struct ModeIndex {
  int k1 = 0;
  int k2 = 0;

  constexpr auto operator<=>(const ModeIndex&) const = default;

  constexpr int norm2() const { return k1 * k1 + k2 * k2; }
  constexpr ModeIndex operator-() const { return {-k1, -k2}; }
  constexpr ModeIndex operator-(ModeIndex o) const { return {k1 - o.k1, k2 - o.k2}; }
  constexpr ModeIndex operator+(ModeIndex o) const { return {k1 + o.k1, k2 + o.k2}; }

  /// Membership in the half lattice Z^2_+ : k1 > 0, or k1 == 0 and k2 > 0.
  constexpr bool in_half_lattice() const { return k1 > 0 || (k1 == 0 && k2 > 0); }
};

/// Where a full-lattice vector lives in a ModeSet: its stored mode, and
/// whether the amplitude must be conjugated (the vector is -stored).
struct LatticeSlot {
  std::uint32_t index;
  bool conjugate;
};

/// One quadratic interaction term of the truncated drift,
///   B[out] += coef * amp(h) * amp(m),   h + m = modes[out].
/// The (h, m) and (m, h) orderings are merged into a single entry.
struct Triad {
  std::uint32_t out;
  LatticeSlot h;
  LatticeSlot m;
  double coef;
};

/// Truncated half-lattice index set with its conjugate bookkeeping and the
/// precomputed interaction table of the Galerkin-truncated Euler drift.
///
/// Instances are immutable and shared through ModeSetPtr.
class ModeSet {
 public:
  /// Euclidean truncation: all k in Z^2_+ with k1^2 + k2^2 <= N^2.
  static std::shared_ptr<const ModeSet> build(int N);

  /// Arbitrary subset of Z^2_+ (sorted and deduplicated). Interactions are
  /// restricted to triads whose three legs all lie in the subset.
  static std::shared_ptr<const ModeSet> from_modes(std::vector<ModeIndex> modes);

  std::size_t size() const { return modes_.size(); }
  bool empty() const { return modes_.empty(); }
  const std::vector<ModeIndex>& modes() const { return modes_; }
  const ModeIndex& operator[](std::size_t i) const { return modes_[i]; }

  /// Truncation order for build(); for from_modes() the smallest N whose
  /// Euclidean ball contains every mode.
  int truncation() const { return truncation_; }

  /// Largest |k1| or |k2| in the set; synthesis needs resolution > 2x this.
  int max_component() const { return max_component_; }

  std::optional<std::size_t> index_of(ModeIndex k) const;

  /// Resolve any nonzero lattice vector to a stored mode (possibly conjugated).
  std::optional<LatticeSlot> slot_of(ModeIndex k) const;

  std::span<const Triad> triads() const { return triads_; }

  /// |k| for every mode, in storage order.
  const std::vector<double>& norms() const { return norms_; }

 private:
  explicit ModeSet(std::vector<ModeIndex> modes, int truncation);

  std::vector<ModeIndex> modes_;
  std::map<ModeIndex, std::size_t> index_of_;
  std::vector<Triad> triads_;
  std::vector<double> norms_;
  int truncation_ = 0;
  int max_component_ = 0;
};

using ModeSetPtr = std::shared_ptr<const ModeSet>;

/// Throws InvalidArgument for N < 1.
ModeSetPtr build_mode_set(int N);

}  // namespace eulerlab
