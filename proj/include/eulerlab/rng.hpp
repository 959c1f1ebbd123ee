#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <utility>

namespace eulerlab {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123). A pure
/// function of (key, counter): every draw is addressed by its indices, so
/// results do not depend on the order or thread that consumes them.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key);
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Deterministic sub-seed for a named component.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view component);

/// Standard normals addressed by (stream, step, item).
///
/// `stream` separates independent realizations (ensemble member, Monte Carlo
/// path); `item` indexes draws within one step (mode, grid cell pair, ...).
class NoiseStream {
 public:
  NoiseStream() = default;
  NoiseStream(std::uint64_t seed, std::uint32_t stream) : key_(split(seed)), stream_(stream) {}

  /// Two independent N(0, 1) draws (polar method).
  std::pair<double, double> normal_pair(std::uint64_t step, std::uint32_t item) const;

  /// Four 32-bit uniforms in (0, 1).
  std::array<double, 4> uniform4(std::uint64_t step, std::uint32_t item) const;

  std::uint32_t stream() const { return stream_; }

 private:
  static Philox4x32::Key split(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  }

  Philox4x32::Key key_{0, 0};
  std::uint32_t stream_ = 0;
};

}  // namespace eulerlab
