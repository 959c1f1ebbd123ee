#include "eulerlab/rng.hpp"

#include <cmath>

namespace eulerlab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view component) {
  // FNV-1a of the name, folded with the parent seed.
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char ch : component) {
    h ^= ch;
    h *= 0x100000001B3ull;
  }
  return mix64(mix64(seed) ^ h);
}

std::array<double, 4> NoiseStream::uniform4(std::uint64_t step, std::uint32_t item) const {
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(step),
                                static_cast<std::uint32_t>(step >> 32), item, stream_};
  const auto r = Philox4x32::generate(ctr, key_);
  std::array<double, 4> u{};
  for (int i = 0; i < 4; ++i) u[i] = (static_cast<double>(r[i]) + 0.5) * 0x1p-32;
  return u;
}

std::pair<double, double> NoiseStream::normal_pair(std::uint64_t step, std::uint32_t item) const {
  // Marsaglia polar method on the two uniform pairs of one Philox block. A
  // rejected block (probability about 5%) moves to the next retry counter,
  // kept in the top 16 bits of the step word, so draws stay addressable.
  auto to_sym = [](std::uint32_t w) { return (static_cast<double>(static_cast<std::int32_t>(w)) + 0.5) * 0x1p-31; };
  for (std::uint32_t retry = 0;; ++retry) {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(step),
                                  static_cast<std::uint32_t>(step >> 32) ^ (retry << 16), item, stream_};
    const auto r = Philox4x32::generate(ctr, key_);
    for (int pair = 0; pair < 2; ++pair) {
      const double v1 = to_sym(r[2 * pair]), v2 = to_sym(r[2 * pair + 1]);
      const double s = v1 * v1 + v2 * v2;
      if (s < 1.0 && s > 0.0) {
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        return {v1 * f, v2 * f};
      }
    }
  }
}

}  // namespace eulerlab
