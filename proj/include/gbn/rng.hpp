#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace gbn {

/// Run seed. Same seed and parameters give bit-identical outputs, independent of
/// the number of worker threads.
struct Seed {
  std::uint64_t value = 0;
};

namespace detail {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

/// Counter-based SplitMix64 stream. Draw k of stream s is a pure function of
/// (seed, s, k), so per-item streams can be consumed in any order or thread.
class Rng {
 public:
  using result_type = std::uint64_t;

  Rng(Seed seed, std::uint64_t stream) noexcept
      : state_(detail::mix64(seed.value + detail::kGolden * (stream + 1)) ^
               detail::mix64(stream ^ 0x632be59bd9b4e019ULL)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    state_ += detail::kGolden;
    return detail::mix64(state_);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(operator()() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(bound)) %
           bound;
  }

  /// Standard normal via Box-Muller (one draw per call, no cached pair).
  double normal() noexcept {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

/// Derives an independent child seed, e.g. one per instance of a sweep.
inline Seed derive_seed(Seed parent, std::uint64_t tag) noexcept {
  return Seed{detail::mix64(parent.value ^ detail::mix64(tag + detail::kGolden))};
}

}  // namespace gbn
