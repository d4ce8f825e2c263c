#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace lmdp {

// Philox4x32-10 counter-based generator. Output is a pure function of
// (key, counter), so any draw can be regenerated without replaying a stream.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit constexpr Philox4x32(Key key) noexcept : key_(key) {}

  explicit constexpr Philox4x32(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  constexpr Counter operator()(Counter ctr) const noexcept {
    Key key = key_;
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter single_round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }

  Key key_;
};

// Uniform in the open interval (0, 1) from two 32-bit words. 52 bits keep
// the largest value at 1 - 2^-53, which is exactly representable.
inline double open_unit_interval(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 12;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

// Addressable stream of standard normals. Normal number j of the stream
// (seed, sample, stream) is fixed; pairs come from one Box-Muller transform.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint32_t sample, std::uint32_t stream) noexcept
      : gen_(seed), sample_(sample), stream_(stream) {}

  std::array<double, 2> pair(std::uint64_t pair_index) const noexcept {
    const auto out = gen_({static_cast<std::uint32_t>(pair_index),
                           static_cast<std::uint32_t>(pair_index >> 32), sample_, stream_});
    const double u1 = open_unit_interval(out[0], out[1]);
    const double u2 = open_unit_interval(out[2], out[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
  }

  double operator[](std::uint64_t index) const noexcept { return pair(index / 2)[index % 2]; }

  // Uniform draw on (0,1) addressed by index; used for sampling boxes.
  double uniform(std::uint64_t index) const noexcept {
    const auto out = gen_({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                           sample_, stream_ ^ 0x5A5A5A5Au});
    return open_unit_interval(out[0], out[1]);
  }

 private:
  Philox4x32 gen_;
  std::uint32_t sample_;
  std::uint32_t stream_;
};

}  // namespace lmdp
