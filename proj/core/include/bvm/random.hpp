#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace bvm {

using RngSeed = std::uint64_t;

/// Philox4x32-10 block function (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

/// Random source for a single draw. Its output is a pure function of
/// (seed, stream, index) so draws can be generated in any order or on any
/// thread and still reproduce bit-for-bit.
class DrawRng {
 public:
  DrawRng(RngSeed seed, std::uint32_t stream, std::uint64_t index)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream),
        index_(index) {}

  std::uint64_t next_u64() {
    if (lane_ == 2) {
      const auto out = philox4x32({block_, stream_, static_cast<std::uint32_t>(index_),
                                   static_cast<std::uint32_t>(index_ >> 32)},
                                  key_);
      buffer_[0] = (std::uint64_t{out[0]} << 32) | out[1];
      buffer_[1] = (std::uint64_t{out[2]} << 32) | out[3];
      ++block_;
      lane_ = 0;
    }
    return buffer_[lane_++];
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal via the Box-Muller cosine branch.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Gamma(shape, 1) by Marsaglia-Tsang; shape < 1 uses the u^(1/shape) boost.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return g * std::pow(uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = 0.0;
      double v = 0.0;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Multiply-shift (high word of the 128-bit product); bias is at most n / 2^64.
    const std::uint64_t x = next_u64();
    const std::uint64_t x_lo = x & 0xffffffffu, x_hi = x >> 32;
    const std::uint64_t n_lo = n & 0xffffffffu, n_hi = n >> 32;
    const std::uint64_t lo_lo = x_lo * n_lo;
    const std::uint64_t hi_lo = x_hi * n_lo;
    const std::uint64_t lo_hi = x_lo * n_hi;
    const std::uint64_t cross = (lo_lo >> 32) + (hi_lo & 0xffffffffu) + lo_hi;
    return x_hi * n_hi + (hi_lo >> 32) + (cross >> 32);
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_;
  std::uint64_t index_;
  std::uint32_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int lane_ = 2;
};

/// Well-known stream ids so model- and data-side draws never share counters.
namespace streams {
inline constexpr std::uint32_t kModel = 0;
inline constexpr std::uint32_t kData = 1;
inline constexpr std::uint32_t kJoint = 2;
inline constexpr std::uint32_t kAuxiliary = 3;
inline constexpr std::uint32_t kBand = 4;
inline constexpr std::uint32_t kInstance = 5;
}  // namespace streams

}  // namespace bvm
