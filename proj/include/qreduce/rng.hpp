#pragma once

// Counter-based Gaussian stream: Philox4x32-10 keyed by the run seed,
// counter built from (step, trajectory). Any increment can be regenerated
// from its coordinates alone, so trajectories are independent of the order
// in which workers evaluate them.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace qreduce {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Standard normal deviate at coordinates (seed, stream, index).
inline double gaussian_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                                static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const auto r = Philox4x32::generate(ctr, key);
  const std::uint64_t a = (std::uint64_t{r[0]} << 32) | r[1];
  const std::uint64_t b = (std::uint64_t{r[2]} << 32) | r[3];
  constexpr double kScale = 0x1.0p-53;
  const double u1 = static_cast<double>((a >> 11) + 1) * kScale;  // (0, 1]
  const double u2 = static_cast<double>(b >> 11) * kScale;        // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Uniform deviate in [0, 1) at the same kind of coordinates.
inline double uniform_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                                static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const auto r = Philox4x32::generate(ctr, key);
  const std::uint64_t a = (std::uint64_t{r[0]} << 32) | r[1];
  return static_cast<double>(a >> 11) * 0x1.0p-53;
}

}  // namespace qreduce
