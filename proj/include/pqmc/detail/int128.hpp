#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include "pqmc/exceptions.hpp"

namespace pqmc {

using u128 = unsigned __int128;

namespace detail {

inline constexpr u128 kU128Max = ~u128{0};
/// Largest power-of-base denominators are kept at or below this bound so that
/// a doubled numerator never overflows.
inline constexpr u128 kDenominatorLimit = u128{1} << 126;

inline std::optional<u128> checked_mul(u128 a, u128 b) {
  if (a != 0 && b > kU128Max / a) return std::nullopt;
  return a * b;
}

/// p^e, throwing ResourceError if it exceeds kDenominatorLimit.
inline u128 pow_checked(std::uint64_t p, std::size_t e) {
  u128 r = 1;
  for (std::size_t i = 0; i < e; ++i) {
    auto next = checked_mul(r, p);
    if (!next || *next > kDenominatorLimit) {
      throw ResourceError("power of base exceeds 126-bit range");
    }
    r = *next;
  }
  return r;
}

/// (a * b) mod m for a, b < m <= 2^127.
inline u128 mulmod(u128 a, u128 b, u128 m) {
  if (auto prod = checked_mul(a, b)) return *prod % m;
  u128 result = 0;
  a %= m;
  while (b != 0) {
    if (b & 1) {
      result += a;
      if (result >= m) result -= m;
    }
    a <<= 1;
    if (a >= m) a -= m;
    b >>= 1;
  }
  return result;
}

/// Correctly rounded (round-to-nearest-even) double of num/den, 0 <= num < den.
///
/// Every rational-to-double conversion in the library goes through here, so
/// two routes that produce the same exact fraction produce the same bits.
inline double to_unit_double(u128 num, u128 den) {
  if (num == 0) return 0.0;
  constexpr u128 kExact = u128{1} << 53;
  if (den <= kExact) {
    return static_cast<double>(static_cast<std::uint64_t>(num)) /
           static_cast<double>(static_cast<std::uint64_t>(den));
  }
  int extra = 0;
  while ((num << 1) < den) {
    num <<= 1;
    ++extra;
  }
  // num/den in [1/2, 1): 64 quotient bits with a sticky bit for the remainder.
  std::uint64_t q = 0;
  u128 rem = num;
  for (int i = 0; i < 64; ++i) {
    rem <<= 1;
    q <<= 1;
    if (rem >= den) {
      rem -= den;
      q |= 1;
    }
  }
  if (rem != 0) q |= 1;
  return std::ldexp(static_cast<double>(q), -64 - extra);
}

/// sin(pi * num / den) for 0 <= num < 2 * den, reduced to [0, pi/2] exactly.
inline double sin_pi_fraction(u128 num, u128 den) {
  double sign = 1.0;
  if (num >= den) {
    num -= den;
    sign = -1.0;
  }
  if (num > den - num) num = den - num;
  constexpr double kPi = 3.14159265358979323846;
  return sign * std::sin(kPi * to_unit_double(num, den));
}

}  // namespace detail
}  // namespace pqmc
