#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pqmc/detail/int128.hpp"
#include "pqmc/exceptions.hpp"
#include "pqmc/primes.hpp"
#include "pqmc/rng.hpp"

namespace pqmc {

using Digit = std::uint32_t;

/// Smallest P with p^{-P} <= 2^{-64}: 64 for p = 2, 41 for p = 3.
inline std::size_t default_precision(std::uint32_t p) {
  require_prime(p);
  const u128 target = u128{1} << 64;
  u128 power = 1;
  std::size_t digits = 0;
  while (power < target) {
    power *= p;
    ++digits;
  }
  return digits;
}

/// One precision shared by every coordinate: the largest per-base precision.
inline std::size_t shared_precision(std::span<const std::uint32_t> bases) {
  std::size_t precision = 1;
  for (auto p : bases) precision = std::max(precision, default_precision(p));
  return precision;
}

/// Element of Z_p truncated to P digits, i.e. an element of Z / p^P Z.
/// digit(r) is z_r in z = sum_r z_r p^r.
class PAdicNumber {
 public:
  PAdicNumber(std::uint32_t base, std::size_t precision)
      : base_(base), digits_(precision, 0) {
    require_prime(base);
    if (precision == 0) throw DomainError("p-adic precision must be at least 1");
  }

  PAdicNumber(std::uint32_t base, std::vector<Digit> digits)
      : base_(base), digits_(std::move(digits)) {
    require_prime(base);
    if (digits_.empty()) throw DomainError("p-adic precision must be at least 1");
    for (auto d : digits_) {
      if (d >= base_) {
        throw DomainError("digit " + std::to_string(d) + " out of range for base " +
                          std::to_string(base_));
      }
    }
  }

  /// Embeds a nonnegative integer; digits beyond the precision are dropped.
  static PAdicNumber from_integer(std::uint32_t base, std::size_t precision,
                                  std::uint64_t n) {
    PAdicNumber z(base, precision);
    for (std::size_t r = 0; r < precision && n != 0; ++r) {
      z.digits_[r] = static_cast<Digit>(n % base);
      n /= base;
    }
    return z;
  }

  std::uint32_t base() const { return base_; }
  std::size_t precision() const { return digits_.size(); }
  Digit digit(std::size_t r) const { return digits_.at(r); }
  std::span<const Digit> digits() const { return digits_; }

  bool is_zero() const {
    for (auto d : digits_) {
      if (d != 0) return false;
    }
    return true;
  }

  friend bool operator==(const PAdicNumber&, const PAdicNumber&) = default;

 private:
  friend PAdicNumber padic_add(const PAdicNumber&, const PAdicNumber&);
  friend PAdicNumber padic_negate(const PAdicNumber&);

  std::uint32_t base_;
  std::vector<Digit> digits_;
};

namespace detail {

inline void require_compatible(const PAdicNumber& a, const PAdicNumber& b) {
  if (a.base() != b.base() || a.precision() != b.precision()) {
    throw IncompatibleOperands("p-adic operands differ in base or precision");
  }
}

/// Numerator over p^k of sum_{r<k} z_r p^{-(r+1)}, with k the index after the
/// last nonzero digit (capped so that p^k stays within 126 bits).
inline std::pair<u128, u128> reflected_fraction(std::uint32_t p,
                                                std::span<const Digit> digits) {
  std::size_t k = digits.size();
  while (k > 0 && digits[k - 1] == 0) --k;
  u128 den = 1;
  std::size_t usable = 0;
  while (usable < k) {
    auto next = checked_mul(den, p);
    if (!next || *next > kDenominatorLimit) break;
    den = *next;
    ++usable;
  }
  u128 num = 0;
  for (std::size_t r = 0; r < usable; ++r) num = num * p + digits[r];
  return {num, den};
}

inline double clamp_below_one(double x) {
  constexpr double kBelowOne = 1.0 - 0x1.0p-53;
  return x < 1.0 ? x : kBelowOne;
}

}  // namespace detail

/// Schoolbook carry addition; the carry out of digit P-1 is discarded.
inline PAdicNumber padic_add(const PAdicNumber& a, const PAdicNumber& b) {
  detail::require_compatible(a, b);
  PAdicNumber out(a.base_, a.precision());
  Digit carry = 0;
  for (std::size_t r = 0; r < a.precision(); ++r) {
    const Digit sum = a.digits_[r] + b.digits_[r] + carry;
    carry = sum >= a.base_ ? 1 : 0;
    out.digits_[r] = sum - carry * a.base_;
  }
  return out;
}

/// Additive inverse mod p^P: complement every digit, then add one.
inline PAdicNumber padic_negate(const PAdicNumber& a) {
  PAdicNumber out(a.base_, a.precision());
  Digit carry = 1;
  for (std::size_t r = 0; r < a.precision(); ++r) {
    const Digit d = (a.base_ - 1 - a.digits_[r]) + carry;
    carry = d >= a.base_ ? 1 : 0;
    out.digits_[r] = d - carry * a.base_;
  }
  return out;
}

inline PAdicNumber padic_sub(const PAdicNumber& a, const PAdicNumber& b) {
  detail::require_compatible(a, b);
  return padic_add(a, padic_negate(b));
}

inline PAdicNumber operator+(const PAdicNumber& a, const PAdicNumber& b) { return padic_add(a, b); }
inline PAdicNumber operator-(const PAdicNumber& a, const PAdicNumber& b) { return padic_sub(a, b); }
inline PAdicNumber operator-(const PAdicNumber& a) { return padic_negate(a); }

/// phi_p(n): the base-p digits of n reflected about the radix point,
/// correctly rounded to double (values that round to 1 are clamped below it).
inline double radical_inverse(std::uint32_t p, std::uint64_t n) {
  require_prime(p);
  u128 num = 0;
  u128 den = 1;
  while (n != 0) {
    num = num * p + n % p;
    den *= p;
    n /= p;
  }
  return detail::clamp_below_one(detail::to_unit_double(num, den));
}

/// Monna map phi_p: Z_p -> [0,1), sum_r z_r p^{-(r+1)}. Agrees bit-for-bit with
/// radical_inverse on embedded integers. A truncation whose value rounds to 1
/// is returned as the largest double below 1.
inline double monna_map(const PAdicNumber& z) {
  const auto [num, den] = detail::reflected_fraction(z.base(), z.digits());
  return detail::clamp_below_one(detail::to_unit_double(num, den));
}

namespace detail {

/// floor(x p^L) at level L = 64 for p = 2 (exact truncation of the binary
/// digits) and the largest L with p^L <= 2^64 for odd p. For odd p, a value
/// within one ulp of a multiple of p^-C (p^C <= 2^40) is snapped onto it, so
/// doubles that are rounded images of p-adic rationals recover their
/// terminating expansion.
struct CellIndex {
  u128 index = 0;
  std::size_t level = 0;
};

inline std::size_t level_below(std::uint32_t p, unsigned bits) {
  std::size_t level = 0;
  for (u128 cells = p; cells <= (u128{1} << bits); cells *= p) ++level;
  return level;
}

inline CellIndex cell_index(double x, std::uint32_t p) {
  CellIndex out;
  out.level = p == 2 ? 64 : level_below(p, 64);
  if (x == 0.0) return out;

  int exponent = 0;
  const double mantissa = std::frexp(x, &exponent);  // x = mantissa * 2^exponent
  const auto m = static_cast<std::uint64_t>(std::ldexp(mantissa, 53));
  const int shift = 53 - exponent;  // x = m / 2^shift, shift >= 54

  if (p == 2) {
    if (shift < 64) {
      out.index = static_cast<u128>(m) << (64 - shift);
    } else if (shift - 64 < 64) {
      out.index = m >> (shift - 64);
    }
    return out;
  }
  if (shift >= 127) return out;
  const u128 unit = u128{1} << shift;
  const std::size_t coarse_level = level_below(p, 40);
  const u128 coarse = pow_checked(p, coarse_level);
  const u128 refine = pow_checked(p, out.level - coarse_level);
  // rem / coarse is the distance above the coarse grid point in ulps of x
  const u128 scaled_coarse = static_cast<u128>(m) * coarse;
  const u128 coarse_index = scaled_coarse >> shift;
  const u128 rem = scaled_coarse & (unit - 1);
  if (rem <= coarse) {
    out.index = coarse_index * refine;
  } else if (unit - rem <= coarse && coarse_index + 1 < coarse) {
    out.index = (coarse_index + 1) * refine;
  } else {
    out.index = (static_cast<u128>(m) * coarse * refine) >> shift;
  }
  return out;
}

/// sum_{r<a} x_r p^r for the first a base-p digits x_0, x_1, ... of x.
inline u128 leading_digits_reflected(double x, std::uint32_t p, std::size_t a) {
  const auto cell = cell_index(x, p);
  const std::size_t used = std::min(a, cell.level);
  u128 top = cell.index / pow_checked(p, cell.level - used);  // the first `used` digits
  u128 low = 0;
  for (std::size_t r = 0; r < used; ++r) {
    low = low * p + top % p;
    top /= p;
  }
  return low;
}

}  // namespace detail

/// phi_p^+ truncated to P digits, using the terminating expansion for p-adic
/// rationals.
///
/// Base 2 digits are read exactly from the binary representation. For odd p
/// the first L digits (p^L <= 2^64) come from detail::cell_index, which snaps
/// rounded images of p-adic rationals back onto them; digits past L are zero,
/// since the double carries no information there.
inline PAdicNumber monna_inverse(double x, std::uint32_t p, std::size_t precision) {
  if (!(x >= 0.0 && x < 1.0)) {
    throw DomainError("monna_inverse requires x in [0,1), got " + std::to_string(x));
  }
  PAdicNumber z(p, precision);
  if (x == 0.0) return z;

  std::vector<Digit> digits(precision, 0);
  if (p == 2) {
    int exponent = 0;
    const double mantissa = std::frexp(x, &exponent);
    const auto m = static_cast<std::uint64_t>(std::ldexp(mantissa, 53));
    const long shift = 53 - exponent;
    for (std::size_t r = 0; r < precision; ++r) {
      const long bit = shift - 1 - static_cast<long>(r);
      if (bit < 0) break;
      if (bit < 53) digits[r] = static_cast<Digit>((m >> bit) & 1u);
    }
    return PAdicNumber(p, std::move(digits));
  }

  auto cell = detail::cell_index(x, p);
  for (std::size_t r = cell.level; r-- > 0;) {
    const auto d = static_cast<Digit>(cell.index % p);
    cell.index /= p;
    if (r < precision) digits[r] = d;
  }
  return PAdicNumber(p, std::move(digits));
}

/// A point in [0,1)^s together with the base attached to each coordinate.
struct UnitPoint {
  std::vector<double> coords;
  std::vector<std::uint32_t> bases;

  std::size_t dimension() const { return coords.size(); }

  void validate() const {
    if (coords.size() != bases.size()) {
      throw DimensionMismatch("point has " + std::to_string(coords.size()) +
                              " coordinates but " + std::to_string(bases.size()) + " bases");
    }
    validate_bases(bases);
    for (double c : coords) {
      if (!(c >= 0.0 && c < 1.0)) throw DomainError("point coordinate outside [0,1)");
    }
  }
};

/// A p-adic shift sigma with one p_j-adic number per coordinate.
struct Shift {
  enum class Provenance { explicit_digits, sampled };

  std::vector<PAdicNumber> sigma;
  Provenance provenance = Provenance::explicit_digits;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;

  std::size_t dimension() const { return sigma.size(); }
  std::size_t precision() const { return sigma.empty() ? 0 : sigma.front().precision(); }

  /// The shift as a point of [0,1)^s (coordinate j is phi_{p_j}(sigma_j)).
  std::vector<double> as_point() const {
    std::vector<double> out;
    out.reserve(sigma.size());
    for (const auto& z : sigma) out.push_back(monna_map(z));
    return out;
  }

  void validate_against(std::span<const std::uint32_t> bases) const {
    if (sigma.size() != bases.size()) {
      throw IncompatibleOperands("shift dimension does not match the bases");
    }
    for (std::size_t j = 0; j < sigma.size(); ++j) {
      if (sigma[j].base() != bases[j]) {
        throw IncompatibleOperands("shift coordinate " + std::to_string(j) +
                                   " has base " + std::to_string(sigma[j].base()) +
                                   ", expected " + std::to_string(bases[j]));
      }
      if (sigma[j].precision() != sigma.front().precision()) {
        throw IncompatibleOperands("shift coordinates must share one precision");
      }
    }
  }
};

/// Builds an explicit shift from points of [0,1)^s via monna_inverse.
inline Shift make_shift(std::span<const std::uint32_t> bases, std::span<const double> sigma,
                        std::size_t precision) {
  if (bases.size() != sigma.size()) throw DimensionMismatch("shift/bases dimension mismatch");
  Shift shift;
  for (std::size_t j = 0; j < bases.size(); ++j) {
    shift.sigma.push_back(monna_inverse(sigma[j], bases[j], precision));
  }
  return shift;
}

namespace detail {

template <typename Op>
UnitPoint combine_point(const UnitPoint& x, const Shift& sigma, Op op) {
  x.validate();
  sigma.validate_against(x.bases);
  UnitPoint out{{}, x.bases};
  out.coords.reserve(x.dimension());
  for (std::size_t j = 0; j < x.dimension(); ++j) {
    const auto& s = sigma.sigma[j];
    out.coords.push_back(monna_map(op(monna_inverse(x.coords[j], s.base(), s.precision()), s)));
  }
  return out;
}

}  // namespace detail

/// x (+)_p sigma, coordinatewise phi_p(phi_p^+(x_j) + sigma_j).
inline UnitPoint shift_point(const UnitPoint& x, const Shift& sigma) {
  return detail::combine_point(x, sigma, padic_add);
}

/// x (-)_p sigma, the inverse of shift_point.
inline UnitPoint unshift_point(const UnitPoint& x, const Shift& sigma) {
  return detail::combine_point(x, sigma, padic_sub);
}

/// Uniform random shift with i.i.d. uniform digits; digit r of coordinate j is
/// drawn from a counter stream keyed by (seed, replicate, j, r).
inline Shift sample_shift(std::span<const std::uint32_t> bases, std::size_t precision,
                          std::uint64_t seed, std::uint64_t replicate) {
  validate_bases(bases);
  if (precision == 0) throw DomainError("shift precision must be at least 1");
  Shift shift;
  shift.provenance = Shift::Provenance::sampled;
  shift.seed = seed;
  shift.replicate = replicate;
  for (std::size_t j = 0; j < bases.size(); ++j) {
    std::vector<Digit> digits(precision);
    for (std::size_t r = 0; r < precision; ++r) {
      CounterRng rng(derive_key({seed, replicate, j, r}));
      digits[r] = static_cast<Digit>(rng.uniform_below(bases[j]));
    }
    shift.sigma.emplace_back(bases[j], std::move(digits));
  }
  return shift;
}

}  // namespace pqmc
