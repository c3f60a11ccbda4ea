#pragma once

#include <bit>
#include <cstdint>

namespace gbn::detail {

// Branch-free exp for non-positive arguments so that pair loops vectorize.
// Cody-Waite reduction x = n ln2 + r, |r| <= ln2/2, Taylor polynomial in r,
// then scaling by 2^n through the exponent bits. Inputs below the normal range
// return 0. Relative error is a few ulp.

inline double fast_exp(double x) noexcept {
  constexpr double kLog2e = 1.4426950408889634;
  constexpr double kLn2Hi = 6.93145751953125e-1;
  constexpr double kLn2Lo = 1.42860682030941723212e-6;
  constexpr double kShift = 6755399441055744.0;  // 1.5 * 2^52
  constexpr double kMin = -708.0;
  const bool under = x < kMin;
  x = under ? kMin : x;
  const double t = x * kLog2e + kShift;
  const double n = t - kShift;
  double r = x - n * kLn2Hi;
  r = r - n * kLn2Lo;
  double p = 1.0 / 6227020800.0;
  p = p * r + 1.0 / 479001600.0;
  p = p * r + 1.0 / 39916800.0;
  p = p * r + 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;
  const std::int64_t k =
      std::bit_cast<std::int64_t>(t) - std::bit_cast<std::int64_t>(kShift);
  const double scale = std::bit_cast<double>((k + 1023) << 52);
  return under ? 0.0 : p * scale;
}

inline float fast_exp(float x) noexcept {
  constexpr float kLog2e = 1.44269504f;
  constexpr float kLn2Hi = 0.693359375f;
  constexpr float kLn2Lo = -2.12194440e-4f;
  constexpr float kShift = 12582912.0f;  // 1.5 * 2^23
  constexpr float kMin = -87.0f;
  const bool under = x < kMin;
  x = under ? kMin : x;
  const float t = x * kLog2e + kShift;
  const float n = t - kShift;
  float r = x - n * kLn2Hi;
  r = r - n * kLn2Lo;
  float p = 1.0f / 5040.0f;
  p = p * r + 1.0f / 720.0f;
  p = p * r + 1.0f / 120.0f;
  p = p * r + 1.0f / 24.0f;
  p = p * r + 1.0f / 6.0f;
  p = p * r + 0.5f;
  p = p * r + 1.0f;
  p = p * r + 1.0f;
  const std::int32_t k =
      std::bit_cast<std::int32_t>(t) - std::bit_cast<std::int32_t>(kShift);
  const float scale = std::bit_cast<float>((k + 127) << 23);
  return under ? 0.0f : p * scale;
}

}  // namespace gbn::detail
