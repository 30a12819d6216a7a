#pragma once

// Shared constants and the scalar form of the exp used by every kernel table.
// The AVX2 variant performs the same operations lane by lane.

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace ruinlab::kernels::detail {

inline constexpr double kLog2e = 1.4426950408889634;
inline constexpr double kLn2Hi = 0x1.62e42fee00000p-1;  // trailing zeros: n * kLn2Hi is exact
inline constexpr double kLn2Lo = 0x1.a39ef35793c76p-33;
inline constexpr double kExpMax = 709.782712893384;
inline constexpr double kExpMin = -708.0;  // below this the result is flushed to zero

// Taylor coefficients 1/k!, k = 13..0, in Horner order.
inline constexpr double kExpPoly[14] = {
    1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
    1.0 / 40320.0,      1.0 / 5040.0,      1.0 / 720.0,      1.0 / 120.0,     1.0 / 24.0,
    1.0 / 6.0,          0.5,               1.0,              1.0};

// 2^k for k in [-1022, 1023].
inline double pow2i(std::int64_t k) {
  return std::bit_cast<double>(static_cast<std::uint64_t>(k + 1023) << 52);
}

inline double exp_scalar(double x) {
  if (x != x) return x;
  const double xc = std::fmin(std::fmax(x, kExpMin), kExpMax);
  const double n = std::nearbyint(xc * kLog2e);
  const double r = (xc - n * kLn2Hi) - n * kLn2Lo;
  double p = kExpPoly[0];
  for (int k = 1; k < 14; ++k) p = p * r + kExpPoly[k];
  double y = (p * pow2i(static_cast<std::int64_t>(n) - 1)) * 2.0;
  if (x < kExpMin) y = 0.0;
  if (x > kExpMax) y = std::numeric_limits<double>::infinity();
  return y;
}

}  // namespace ruinlab::kernels::detail
