#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pqmc/exceptions.hpp"
#include "pqmc/padic_functions.hpp"
#include "pqmc/primes.hpp"

namespace pqmc {

// ---------------------------------------------------------------------------
// One-dimensional coefficient sequences
// ---------------------------------------------------------------------------

/// Coefficient of a frequency with digit length a >= 1 and leading digit kappa
/// in the anchored Sobolev space:
/// gamma / (2 p^{2a}) * (1 / sin^2(kappa pi / p) - 1/3).
inline double r_sobolev_digits(std::uint32_t p, double gamma, std::size_t a, Digit kappa) {
  const double s = std::sin(std::numbers::pi * kappa / p);
  return gamma / (2.0 * std::pow(static_cast<double>(p), 2.0 * static_cast<double>(a))) *
         (1.0 / (s * s) - 1.0 / 3.0);
}

inline double r_sobolev(std::uint32_t p, double gamma, std::uint64_t k) {
  require_prime(p);
  if (k == 0) return 1.0 + gamma / 3.0;
  const auto info = digit_info(p, k);
  return r_sobolev_digits(p, gamma, info.length, info.leading);
}

/// sum_{k >= 0} r_sobolev(p, gamma, k).
inline double r_sum_total(double gamma) { return 1.0 + gamma / 2.0; }

/// sum_{k < p^g} r_sobolev(p, gamma, k) in closed form.
inline double r_sum_box(std::uint32_t p, double gamma, unsigned g) {
  require_prime(p);
  return 1.0 + gamma / 3.0 + gamma / 6.0 * (1.0 - std::pow(static_cast<double>(p), -static_cast<double>(g)));
}

/// sum_{k >= p^g} r_sobolev(p, gamma, k) = gamma / (6 p^g).
inline double r_tail(std::uint32_t p, double gamma, unsigned g) {
  require_prime(p);
  return gamma / 6.0 * std::pow(static_cast<double>(p), -static_cast<double>(g));
}

inline double r_sum_box_multi(std::span<const std::uint32_t> bases, std::span<const double> gamma,
                              std::span<const unsigned> g) {
  if (bases.size() != gamma.size() || bases.size() != g.size()) {
    throw DimensionMismatch("r_sum_box_multi: argument lengths differ");
  }
  double out = 1.0;
  for (std::size_t j = 0; j < bases.size(); ++j) out *= r_sum_box(bases[j], gamma[j], g[j]);
  return out;
}

/// r(0) for the Sobolev space anchored at w: 1 + gamma (w^2 - w + 1/3).
inline double anchor_w_r0(double gamma, double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw DomainError("anchor must lie in [0,1]");
  return 1.0 + gamma * (w * w - w + 1.0 / 3.0);
}

inline void require_alpha(double alpha) {
  if (!(alpha > 1.0)) throw DomainError("alpha must exceed 1, got " + std::to_string(alpha));
}

/// Korobov-type coefficient: 1 for k = 0, gamma p^{-alpha (a-1)} otherwise.
inline double r_korobov(std::uint32_t p, double alpha, double gamma, std::uint64_t k) {
  require_prime(p);
  require_alpha(alpha);
  if (k == 0) return 1.0;
  const auto info = digit_info(p, k);
  return gamma * std::pow(static_cast<double>(p), -alpha * static_cast<double>(info.length - 1));
}

/// sum_{k >= 0} r_korobov = 1 + gamma (p-1) / (1 - p^{1-alpha}).
inline double korobov_sum_total(std::uint32_t p, double alpha, double gamma) {
  require_alpha(alpha);
  return 1.0 + gamma * (p - 1.0) / (1.0 - std::pow(static_cast<double>(p), 1.0 - alpha));
}

/// sum_{k >= p^g} r_korobov = gamma (p-1) p^{(1-alpha) g} / (1 - p^{1-alpha}).
inline double korobov_tail(std::uint32_t p, double alpha, double gamma, unsigned g) {
  require_alpha(alpha);
  const double q = std::pow(static_cast<double>(p), 1.0 - alpha);
  return gamma * (p - 1.0) * std::pow(q, static_cast<double>(g)) / (1.0 - q);
}

inline double korobov_sum_box(std::uint32_t p, double alpha, double gamma, unsigned g) {
  const double q = std::pow(static_cast<double>(p), 1.0 - alpha);
  return 1.0 + gamma * (p - 1.0) * (1.0 - std::pow(q, static_cast<double>(g))) / (1.0 - q);
}

// ---------------------------------------------------------------------------
// Weighted spaces
// ---------------------------------------------------------------------------

enum class AnchorKind { one, w, unanchored };

struct Anchor {
  AnchorKind kind = AnchorKind::one;
  std::vector<double> w;  ///< per coordinate, only for AnchorKind::w
};

/// A product-weighted space over bases p_1..p_s. Korobov-type when alpha is
/// present, otherwise a Sobolev space with the given anchor.
struct WeightedSpace {
  std::vector<std::uint32_t> bases;
  std::vector<double> gamma;
  std::optional<std::vector<double>> alpha;
  Anchor anchor;

  std::size_t dimension() const { return bases.size(); }
  bool is_korobov() const { return alpha.has_value(); }

  void validate() const {
    validate_bases(bases);
    if (gamma.size() != bases.size()) throw DimensionMismatch("gamma length does not match the bases");
    for (double g : gamma) {
      if (!(g > 0.0) || !std::isfinite(g)) throw DomainError("weights must be positive and finite");
    }
    if (alpha) {
      if (alpha->size() != bases.size()) throw DimensionMismatch("alpha length does not match the bases");
      for (double a : *alpha) require_alpha(a);
    }
    if (anchor.kind == AnchorKind::w) {
      if (anchor.w.size() != bases.size()) throw DimensionMismatch("anchor length does not match the bases");
      for (double w : anchor.w) {
        if (!(w >= 0.0 && w <= 1.0)) throw DomainError("anchor must lie in [0,1]");
      }
    }
  }

  double coefficient_zero(std::size_t j) const {
    if (alpha) return 1.0;
    switch (anchor.kind) {
      case AnchorKind::one: return 1.0 + gamma[j] / 3.0;
      case AnchorKind::w: return anchor_w_r0(gamma[j], anchor.w[j]);
      case AnchorKind::unanchored: return 1.0;
    }
    return 1.0;
  }

  /// Coefficient of any k > 0 with digit length a and leading digit kappa.
  double coefficient_by_digits(std::size_t j, std::size_t a, Digit kappa) const {
    const auto p = static_cast<double>(bases[j]);
    if (alpha) return gamma[j] * std::pow(p, -(*alpha)[j] * static_cast<double>(a - 1));
    return r_sobolev_digits(bases[j], gamma[j], a, kappa);
  }

  double coefficient(std::size_t j, std::uint64_t k) const {
    if (k == 0) return coefficient_zero(j);
    const auto info = digit_info(bases[j], k);
    return coefficient_by_digits(j, info.length, info.leading);
  }

  /// sum over k < p^g of coefficient(j, k).
  double coefficient_box(std::size_t j, unsigned g) const {
    if (alpha) return korobov_sum_box(bases[j], (*alpha)[j], gamma[j], g);
    return coefficient_zero(j) + gamma[j] / 6.0 * (1.0 - std::pow(static_cast<double>(bases[j]), -static_cast<double>(g)));
  }

  /// sum over k >= p^g of coefficient(j, k).
  double coefficient_tail(std::size_t j, unsigned g) const {
    if (alpha) return korobov_tail(bases[j], (*alpha)[j], gamma[j], g);
    return r_tail(bases[j], gamma[j], g);
  }

  double coefficient_total(std::size_t j) const { return coefficient_box(j, 0) + coefficient_tail(j, 0); }

  /// sum over k outside the box prod_j [0, p_j^{g_j}), telescoped so that it
  /// stays nonnegative and accurate when small.
  double tail_outside_box(std::span<const unsigned> g) const {
    if (g.size() != dimension()) throw DimensionMismatch("truncation length does not match the space");
    double out = 0.0;
    for (std::size_t j = 0; j < dimension(); ++j) {
      double term = coefficient_tail(j, g[j]);
      for (std::size_t i = 0; i < j; ++i) term *= coefficient_box(i, g[i]);
      for (std::size_t i = j + 1; i < dimension(); ++i) term *= coefficient_total(i);
      out += term;
    }
    return out;
  }

  double product_zero() const {
    double out = 1.0;
    for (std::size_t j = 0; j < dimension(); ++j) out *= coefficient_zero(j);
    return out;
  }

  double product_total() const {
    double out = 1.0;
    for (std::size_t j = 0; j < dimension(); ++j) out *= coefficient_total(j);
    return out;
  }
};

inline WeightedSpace sobolev_space(std::vector<std::uint32_t> bases, std::vector<double> gamma) {
  WeightedSpace space{std::move(bases), std::move(gamma), std::nullopt, {}};
  space.validate();
  return space;
}

inline WeightedSpace korobov_space(std::vector<std::uint32_t> bases, std::vector<double> gamma,
                                   std::vector<double> alpha) {
  WeightedSpace space{std::move(bases), std::move(gamma), std::move(alpha), {}};
  space.validate();
  return space;
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

namespace detail {

inline void check_pair(const WeightedSpace& space, std::span<const double> x, std::span<const double> y) {
  if (x.size() != space.dimension() || y.size() != space.dimension()) {
    throw DimensionMismatch("kernel arguments do not match the space dimension");
  }
}

inline double bernoulli2(double x) { return x * x - x + 1.0 / 6.0; }

}  // namespace detail

/// prod_j (1 + gamma_j min(1 - x_j, 1 - y_j)) on [0,1]^s.
inline double sobolev_kernel(const WeightedSpace& space, std::span<const double> x, std::span<const double> y) {
  if (space.anchor.kind != AnchorKind::one || space.is_korobov()) {
    throw DomainError("sobolev_kernel needs the Sobolev space anchored at 1");
  }
  detail::check_pair(space, x, y);
  double out = 1.0;
  for (std::size_t j = 0; j < x.size(); ++j) out *= 1.0 + space.gamma[j] * std::min(1.0 - x[j], 1.0 - y[j]);
  return out;
}

/// prod_j (1 + gamma_j (|x_j - w_j| + |y_j - w_j| - |x_j - y_j|) / 2).
inline double anchored_kernel(const WeightedSpace& space, std::span<const double> x, std::span<const double> y) {
  if (space.anchor.kind != AnchorKind::w) throw DomainError("anchored_kernel needs an explicit anchor");
  detail::check_pair(space, x, y);
  double out = 1.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double w = space.anchor.w[j];
    out *= 1.0 + space.gamma[j] * 0.5 * (std::abs(x[j] - w) + std::abs(y[j] - w) - std::abs(x[j] - y[j]));
  }
  return out;
}

/// prod_j (1 + gamma_j (B_2({x_j - y_j}) / 2 + (x_j - 1/2)(y_j - 1/2))).
inline double unanchored_kernel(const WeightedSpace& space, std::span<const double> x, std::span<const double> y) {
  detail::check_pair(space, x, y);
  double out = 1.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double diff = x[j] - y[j];
    const double frac = diff - std::floor(diff);
    out *= 1.0 + space.gamma[j] * (detail::bernoulli2(frac) / 2.0 + (x[j] - 0.5) * (y[j] - 0.5));
  }
  return out;
}

/// The reproducing kernel of a Sobolev space, whichever its anchor.
inline double kernel(const WeightedSpace& space, std::span<const double> x, std::span<const double> y) {
  if (space.is_korobov()) throw DomainError("the Korobov-type kernel is only available as a series");
  switch (space.anchor.kind) {
    case AnchorKind::one: return sobolev_kernel(space, x, y);
    case AnchorKind::w: return anchored_kernel(space, x, y);
    case AnchorKind::unanchored: return unanchored_kernel(space, x, y);
  }
  return 0.0;
}

/// A truncated series together with a bound on what the truncation dropped.
struct SeriesValue {
  double value = 0.0;
  double tail = 0.0;
};

/// Shift-invariant kernel sum_k r(k) beta_k(x) conj(beta_k(y)) over the box
/// prod_j [0, p_j^{g_j}); the tail bound is the coefficient mass outside it.
inline SeriesValue shift_invariant_kernel(const WeightedSpace& space, std::span<const double> x,
                                          std::span<const double> y, std::span<const unsigned> g) {
  space.validate();
  detail::check_pair(space, x, y);
  if (g.size() != space.dimension()) throw DimensionMismatch("truncation length does not match the space");
  double value = 1.0;
  for (std::size_t j = 0; j < space.dimension(); ++j) {
    if (g[j] < 1) throw DomainError("truncation g must be at least 1");
    const auto p = space.bases[j];
    const auto extent = static_cast<std::uint64_t>(detail::pow_checked(p, g[j]));
    std::complex<double> partial = 0.0;
    for (std::uint64_t k = 0; k < extent; ++k) {
      partial += space.coefficient(j, k) * beta(p, k, x[j]) * std::conj(beta(p, k, y[j]));
    }
    if (std::abs(partial.imag()) > 1e-10) {
      throw NumericalConsistencyError("shift-invariant kernel series has imaginary part " +
                                      std::to_string(partial.imag()));
    }
    value *= partial.real();
  }
  return {value, space.tail_outside_box(g)};
}

/// K_sh(x_m, x_n) in coordinate j for two Halton points with index difference
/// d = m - n, exactly.
///
/// beta_k(x_m) conj(beta_k(x_n)) = e(phi_p(k) d). Summing over the lower
/// digits of k leaves only digit lengths a <= v + 1 with v = v_p(d): each
/// a <= v contributes p^{a-1} sum_kappa c(a, kappa) and a = v + 1 contributes
/// p^v sum_kappa c(v+1, kappa) cos(2 pi kappa t / p), t = (d / p^v) mod p.
inline double shift_invariant_kernel_lag(const WeightedSpace& space, std::size_t j, std::int64_t d) {
  if (d == 0) return space.coefficient_total(j);
  const std::uint32_t p = space.bases.at(j);
  auto m = static_cast<std::uint64_t>(d < 0 ? -d : d);
  std::size_t v = 0;
  while (m % p == 0) {
    m /= p;
    ++v;
  }
  const auto t = static_cast<std::uint32_t>(m % p);
  double out = space.coefficient_zero(j);
  double scale = 1.0;  // p^{a-1}
  for (std::size_t a = 1; a <= v; ++a) {
    double level = 0.0;
    for (Digit kappa = 1; kappa < p; ++kappa) level += space.coefficient_by_digits(j, a, kappa);
    out += scale * level;
    scale *= p;
  }
  double last = 0.0;
  for (Digit kappa = 1; kappa < p; ++kappa) {
    const auto turns = static_cast<double>((static_cast<std::uint64_t>(kappa) * t) % p) / p;
    last += space.coefficient_by_digits(j, v + 1, kappa) * std::cos(kTwoPi * turns);
  }
  return out + scale * last;
}

}  // namespace pqmc
