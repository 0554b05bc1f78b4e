#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pqmc/detail/int128.hpp"
#include "pqmc/exceptions.hpp"
#include "pqmc/halton.hpp"
#include "pqmc/padic.hpp"
#include "pqmc/primes.hpp"

namespace pqmc {

inline constexpr double kTwoPi = 6.28318530717958647692;

/// Digit structure of a frequency k in base p.
struct DigitInfo {
  std::uint64_t k = 0;
  std::size_t length = 0;  ///< a: number of base-p digits, 0 iff k == 0
  Digit leading = 0;       ///< kappa_{a-1}, nonzero when k > 0
  u128 reflected = 0;      ///< phi_p(k) * p^a, an integer coprime to p when k > 0
  u128 modulus = 1;        ///< p^a
};

inline DigitInfo digit_info(std::uint32_t p, std::uint64_t k) {
  DigitInfo info;
  info.k = k;
  for (std::uint64_t n = k; n != 0; n /= p) {
    info.reflected = info.reflected * p + n % p;
    info.modulus *= p;
    info.leading = static_cast<Digit>(n % p);
    ++info.length;
  }
  return info;
}

/// Exact fraction numerator/denominator in [0,1).
struct Fraction {
  u128 numerator = 0;
  u128 denominator = 1;

  double value() const { return detail::to_unit_double(numerator, denominator); }
  bool is_integer() const { return numerator == 0; }
};

/// A multi-index k in N_0^s together with its per-coordinate digit data.
class FrequencyIndex {
 public:
  FrequencyIndex(std::vector<std::uint32_t> bases, std::vector<std::uint64_t> k)
      : bases_(std::move(bases)), k_(std::move(k)) {
    if (bases_.size() != k_.size()) throw DimensionMismatch("frequency index/bases dimension mismatch");
    validate_bases(bases_);
    for (std::size_t j = 0; j < k_.size(); ++j) info_.push_back(digit_info(bases_[j], k_[j]));
    theta_ = compute_theta();
    if (!is_zero() && theta_.is_integer()) {
      // Impossible for pairwise distinct primes: the reduced denominator is prod p_j^{a_j}.
      throw NumericalConsistencyError("theta of a nonzero frequency is an integer");
    }
  }

  std::size_t dimension() const { return k_.size(); }
  std::span<const std::uint32_t> bases() const { return bases_; }
  std::span<const std::uint64_t> components() const { return k_; }
  const DigitInfo& info(std::size_t j) const { return info_.at(j); }

  bool is_zero() const {
    return std::all_of(k_.begin(), k_.end(), [](auto v) { return v == 0; });
  }

  /// theta = sum_j phi_{p_j}(k_j) mod 1 over the common denominator prod p_j^{a_j}.
  const Fraction& theta() const { return theta_; }

 private:
  Fraction compute_theta() const {
    Fraction f;
    for (const auto& info : info_) {
      auto den = detail::checked_mul(f.denominator, info.modulus);
      if (!den || *den > detail::kDenominatorLimit) {
        throw ResourceError("frequency denominator exceeds 126 bits");
      }
      f.denominator = *den;
    }
    for (const auto& info : info_) {
      f.numerator = (f.numerator + info.reflected * (f.denominator / info.modulus)) % f.denominator;
    }
    return f;
  }

  std::vector<std::uint32_t> bases_;
  std::vector<std::uint64_t> k_;
  std::vector<DigitInfo> info_;
  Fraction theta_;
};

/// e^{2 pi i num/den}, with the angle reduced exactly to [-pi, pi].
inline std::complex<double> unit_root(u128 num, u128 den) {
  num %= den;
  double turns;
  if (num > den - num) {
    turns = -detail::to_unit_double(den - num, den);
  } else {
    turns = detail::to_unit_double(num, den);
  }
  return std::polar(1.0, kTwoPi * turns);
}

/// chi_k(z) = e^{2 pi i phi_p(k) z}; only the first a digits of z matter.
inline std::complex<double> character(std::uint64_t k, const PAdicNumber& z) {
  const auto info = digit_info(z.base(), k);
  if (info.length == 0) return 1.0;
  u128 low = 0;
  for (std::size_t r = std::min(info.length, z.precision()); r-- > 0;) low = low * z.base() + z.digit(r);
  return unit_root(detail::mulmod(info.reflected, low % info.modulus, info.modulus), info.modulus);
}

/// beta_k(x) = chi_k(phi_p^+(x)), reduced in exact integer arithmetic modulo p^a
/// before a single complex exponential.
inline std::complex<double> beta(std::uint32_t p, std::uint64_t k, double x) {
  require_prime(p);
  if (!(x >= 0.0 && x < 1.0)) throw DomainError("beta requires x in [0,1)");
  const auto info = digit_info(p, k);
  if (info.length == 0) return 1.0;
  const u128 low = detail::leading_digits_reflected(x, p, info.length);
  return unit_root(detail::mulmod(info.reflected, low, info.modulus), info.modulus);
}

/// prod_j beta_{k_j}(x_j).
inline std::complex<double> beta_multi(const FrequencyIndex& k, std::span<const double> x) {
  if (x.size() != k.dimension()) throw DimensionMismatch("beta_multi: point/frequency dimension mismatch");
  std::complex<double> out = 1.0;
  for (std::size_t j = 0; j < x.size(); ++j) out *= beta(k.bases()[j], k.components()[j], x[j]);
  return out;
}

/// |sum_{n<N} e(n theta)|^2 = sin^2(pi N theta) / sin^2(pi theta), theta = num/den,
/// for theta not an integer.
inline double fejer_sq(u128 num, u128 den, std::uint64_t count) {
  const u128 twice = den * 2;
  const double top = detail::sin_pi_fraction(detail::mulmod(count % twice, num, twice), den);
  const double bottom = detail::sin_pi_fraction(num, den);
  return (top * top) / (bottom * bottom);
}

/// sum_{n<N} beta_k(x_n) over the unshifted Halton sequence, in closed form.
///
/// beta_k(x_n) = e(n theta) exactly, so the sum is geometric:
/// e((N-1) theta / 2) sin(pi N theta) / sin(pi theta).
inline std::complex<double> char_sum_halton(const FrequencyIndex& k, std::uint64_t count) {
  if (k.is_zero()) return static_cast<double>(count);
  if (count == 0) return 0.0;
  const auto& th = k.theta();
  const u128 twice = th.denominator * 2;
  const double top = detail::sin_pi_fraction(detail::mulmod(count % twice, th.numerator, twice),
                                              th.denominator);
  const double bottom = detail::sin_pi_fraction(th.numerator, th.denominator);
  // phase e((N-1) theta / 2) = e(((N-1) num mod 2D) / 2D)
  const auto phase = unit_root(detail::mulmod((count - 1) % twice, th.numerator, twice), twice);
  return phase * (top / bottom);
}

/// The same sum by direct evaluation of beta at generated Halton points.
inline std::complex<double> char_sum_halton_direct(const FrequencyIndex& k, std::uint64_t count,
                                                   std::uint64_t start_index = 0) {
  HaltonSpec spec{{k.bases().begin(), k.bases().end()}, start_index, std::nullopt};
  HaltonGenerator gen(spec);
  std::vector<double> x(k.dimension());
  std::complex<double> sum = 0.0;
  for (std::uint64_t n = 0; n < count; ++n) {
    gen.next(x);
    sum += beta_multi(k, x);
  }
  return sum;
}

/// Shifting every point by sigma multiplies the character sum by beta_k(sigma).
inline std::complex<double> shift_factor(const FrequencyIndex& k, const Shift& sigma) {
  sigma.validate_against(k.bases());
  std::complex<double> out = 1.0;
  for (std::size_t j = 0; j < k.dimension(); ++j) out *= character(k.components()[j], sigma.sigma[j]);
  return out;
}

/// Which part of the index box prod_j [0, p_j^{g_j}) to enumerate.
enum class BoxMode {
  full,       ///< Delta_p(g)
  punctured,  ///< Delta*_p(g): the full box without k = 0
  interior,   ///< all k_j >= 1
};

struct IndexBox {
  std::vector<std::uint32_t> bases;
  std::vector<unsigned> g;
  BoxMode mode = BoxMode::full;

  void validate() const {
    validate_bases(bases);
    if (g.size() != bases.size()) throw DimensionMismatch("index box: g/bases dimension mismatch");
    for (auto v : g) {
      if (v < 1) throw DomainError("index box cutoffs must be at least 1");
    }
  }

  std::uint64_t extent(std::size_t j) const {
    return static_cast<std::uint64_t>(detail::pow_checked(bases[j], g[j]));
  }

  /// Number of indices, or nullopt beyond 2^64.
  std::optional<std::uint64_t> count() const {
    u128 total = 1;
    for (std::size_t j = 0; j < bases.size(); ++j) {
      const u128 e = mode == BoxMode::interior ? extent(j) - 1 : extent(j);
      auto next = detail::checked_mul(total, e);
      if (!next || *next > ~std::uint64_t{0}) return std::nullopt;
      total = *next;
    }
    if (mode == BoxMode::punctured) total -= 1;
    return static_cast<std::uint64_t>(total);
  }

  /// Calls fn(span<const uint64_t> k) for every index in odometer order.
  void for_each(const std::function<void(std::span<const std::uint64_t>)>& fn) const {
    validate();
    const std::uint64_t lo = mode == BoxMode::interior ? 1 : 0;
    std::vector<std::uint64_t> k(bases.size(), lo);
    std::vector<std::uint64_t> hi(bases.size());
    for (std::size_t j = 0; j < bases.size(); ++j) hi[j] = extent(j);
    while (true) {
      const bool zero = std::all_of(k.begin(), k.end(), [](auto v) { return v == 0; });
      if (!(mode == BoxMode::punctured && zero)) fn(k);
      std::size_t j = 0;
      while (j < k.size() && ++k[j] == hi[j]) k[j++] = lo;
      if (j == k.size()) break;
    }
  }
};

/// Max entrywise |G - I| for the Gram matrix of {beta_k : k < p^g}.
///
/// All these functions are constant on the p^g cells [c p^-g, (c+1) p^-g), so
/// averaging products at Q equispaced midpoints (Q a multiple of p^g) is an
/// exact cell sum rather than an approximate quadrature.
inline double gram_check(std::uint32_t p, unsigned g, std::uint64_t resolution) {
  require_prime(p);
  const auto cells = static_cast<std::uint64_t>(detail::pow_checked(p, g));
  if (resolution == 0 || resolution % cells != 0) {
    throw ResolutionError("gram_check resolution " + std::to_string(resolution) +
                          " is not a multiple of p^g = " + std::to_string(cells));
  }
  std::vector<std::complex<double>> table(cells * resolution);
  for (std::uint64_t k = 0; k < cells; ++k) {
    for (std::uint64_t i = 0; i < resolution; ++i) {
      const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(resolution);
      table[k * resolution + i] = beta(p, k, x);
    }
  }
  double worst = 0.0;
  for (std::uint64_t k = 0; k < cells; ++k) {
    for (std::uint64_t l = 0; l < cells; ++l) {
      std::complex<double> acc = 0.0;
      for (std::uint64_t i = 0; i < resolution; ++i) {
        acc += table[k * resolution + i] * std::conj(table[l * resolution + i]);
      }
      acc /= static_cast<double>(resolution);
      worst = std::max(worst, std::abs(acc - (k == l ? 1.0 : 0.0)));
    }
  }
  return worst;
}

}  // namespace pqmc
