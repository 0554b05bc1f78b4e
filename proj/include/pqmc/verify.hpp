#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pqmc/csv.hpp"
#include "pqmc/discrepancy.hpp"
#include "pqmc/halton.hpp"
#include "pqmc/kernels.hpp"
#include "pqmc/padic.hpp"
#include "pqmc/padic_functions.hpp"
#include "pqmc/primes.hpp"
#include "pqmc/rng.hpp"
#include "pqmc/stats.hpp"
#include "pqmc/worst_case.hpp"

// Brute-force oracles. None of these reuse the closed form they check: cell
// sums, quadrature and direct summation only.
namespace pqmc::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;

  std::vector<std::string> csv_row() const {
    return {name, passed ? "pass" : "fail", csv::format_double(measured), csv::format_double(tolerance)};
  }
};

// ---------------------------------------------------------------------------
// tau_p(k) = int int |x - y| conj(beta_k(x)) beta_k(y) dx dy
// ---------------------------------------------------------------------------

struct TauCheck {
  double closed_form = 0.0;
  double brute_force = 0.0;
  double diff = 0.0;
};

/// The double integral over the p^a x p^a cells on which beta_k is constant:
/// 1/(3 p^{3a}) on the diagonal and |u - v| / p^{3a} off it.
inline double tau_brute_force(std::uint32_t p, std::uint64_t k) {
  const auto info = digit_info(p, k);
  const auto cells = static_cast<std::uint64_t>(info.modulus);
  if (cells > 4096) throw ResourceError("tau brute force is limited to p^a <= 4096 cells");
  std::vector<std::complex<double>> value(cells);
  for (std::uint64_t u = 0; u < cells; ++u) {
    value[u] = beta(p, k, (static_cast<double>(u) + 0.5) / static_cast<double>(cells));
  }
  const double h3 = std::pow(static_cast<double>(cells), -3.0);
  CompensatedSum re;
  for (std::uint64_t u = 0; u < cells; ++u) {
    for (std::uint64_t v = 0; v < cells; ++v) {
      const double weight = u == v ? h3 / 3.0 : static_cast<double>(u > v ? u - v : v - u) * h3;
      re.add(weight * (std::conj(value[u]) * value[v]).real());
    }
  }
  return re.value();
}

inline TauCheck check_tau(std::uint32_t p, std::uint64_t k) {
  require_prime(p);
  if (k == 0) throw DomainError("check_tau needs k >= 1");
  const auto info = digit_info(p, k);
  const double sin_kappa = std::sin(std::numbers::pi * info.leading / p);
  TauCheck out;
  out.closed_form = std::pow(static_cast<double>(p), -2.0 * static_cast<double>(info.length)) *
                    (1.0 / 3.0 - 1.0 / (sin_kappa * sin_kappa));
  out.brute_force = tau_brute_force(p, k);
  out.diff = std::abs(out.closed_form - out.brute_force);
  return out;
}

// ---------------------------------------------------------------------------
// sum_{kappa=1}^{p-1} 1/sin^2(kappa pi / p) = (p^2 - 1)/3
// ---------------------------------------------------------------------------

struct SumCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double diff = 0.0;
};

inline SumCheck check_sin_sum(std::uint32_t p) {
  require_prime(p);
  if (p > 10000) throw DomainError("check_sin_sum is limited to p <= 10^4");
  CompensatedSum lhs;
  for (std::uint32_t kappa = 1; kappa < p; ++kappa) {
    const double s = std::sin(std::numbers::pi * kappa / p);
    lhs.add(1.0 / (s * s));
  }
  const double rhs = (static_cast<double>(p) * p - 1.0) / 3.0;
  return {lhs.value(), rhs, std::abs(lhs.value() - rhs)};
}

/// |midpoint quadrature of int int (1 + gamma min(1-x, 1-y)) - (1 + gamma/3)|.
inline double check_khat0(double gamma, std::size_t resolution) {
  if (resolution < 64) throw DomainError("check_khat0 needs Q >= 64");
  const auto q = static_cast<double>(resolution);
  CompensatedSum acc;
  for (std::size_t i = 0; i < resolution; ++i) {
    const double x = (static_cast<double>(i) + 0.5) / q;
    double row = 0.0;
    for (std::size_t k = 0; k < resolution; ++k) {
      const double y = (static_cast<double>(k) + 0.5) / q;
      row += 1.0 + gamma * std::min(1.0 - x, 1.0 - y);
    }
    acc.add(row);
  }
  return std::abs(acc.value() / (q * q) - (1.0 + gamma / 3.0));
}

// ---------------------------------------------------------------------------
// Shift-invariant kernel against the average over shifts
// ---------------------------------------------------------------------------

/// int K(x (+) sigma, y (+) sigma) dsigma for s = 1, averaged over the
/// midpoints of `cells` equal cells (cells a power of p).
inline double shift_average_1d(std::uint32_t p, double gamma, double x, double y, std::uint64_t cells) {
  require_prime(p);
  std::uint64_t c = cells;
  while (c > 1 && c % p == 0) c /= p;
  if (cells == 0 || c != 1) throw ResolutionError("shift quadrature cells must be a power of p");
  const auto precision = default_precision(p);
  const auto zx = monna_inverse(x, p, precision);
  const auto zy = monna_inverse(y, p, precision);
  CompensatedSum acc;
  for (std::uint64_t i = 0; i < cells; ++i) {
    const auto sigma = monna_inverse((static_cast<double>(i) + 0.5) / static_cast<double>(cells), p, precision);
    const double sx = monna_map(zx + sigma);
    const double sy = monna_map(zy + sigma);
    acc.add(1.0 + gamma * std::min(1.0 - sx, 1.0 - sy));
  }
  return acc.value() / static_cast<double>(cells);
}

struct KernelCheck {
  double max_diff = 0.0;    ///< max |quadrature - series| over the pairs
  double tail = 0.0;        ///< series tail bound
  double max_excess = 0.0;  ///< max (|quadrature - series| - tail)
};

inline KernelCheck check_shift_invariant_kernel(std::uint32_t p, double gamma,
                                                std::span<const std::pair<double, double>> pairs, unsigned g,
                                                std::uint64_t cells) {
  const auto space = sobolev_space({p}, {gamma});
  const unsigned gs[] = {g};
  KernelCheck out;
  out.max_excess = -1.0;
  for (const auto& [x, y] : pairs) {
    const double xs[] = {x};
    const double ys[] = {y};
    const auto series = shift_invariant_kernel(space, xs, ys, gs);
    const double diff = std::abs(shift_average_1d(p, gamma, x, y, cells) - series.value);
    out.tail = series.tail;
    out.max_diff = std::max(out.max_diff, diff);
    out.max_excess = std::max(out.max_excess, diff - series.tail);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Character sums by direct summation of beta over Halton points
// ---------------------------------------------------------------------------

/// Largest g with p^g <= limit.
inline unsigned digits_within(std::uint32_t p, std::uint64_t limit) {
  unsigned g = 0;
  for (std::uint64_t v = p; v <= limit; v *= p) ++g;
  return g;
}

/// max over sampled (k, N) of |S_N(k)| |sin(pi theta)|, k in the interior box
/// (all k_j >= 1, k_j < p_j^{g_j} with p_j^{g_j} <= 4096) and 1 <= N <= n_max.
inline double check_char_sum_bound(std::span<const std::uint32_t> bases, std::size_t samples, std::uint64_t seed,
                                   std::uint64_t n_max = 4096) {
  validate_bases(bases);
  const std::size_t s = bases.size();
  std::vector<unsigned> g(s);
  std::vector<std::uint64_t> extent(s);
  for (std::size_t j = 0; j < s; ++j) {
    g[j] = digits_within(bases[j], 4096);
    extent[j] = static_cast<std::uint64_t>(detail::pow_checked(bases[j], g[j]));
  }
  // First g_j digits of phi^+(x_n), reflected into an integer, read off the doubles.
  HaltonGenerator gen(HaltonSpec{{bases.begin(), bases.end()}, 0, std::nullopt});
  std::vector<std::vector<std::uint64_t>> low(s, std::vector<std::uint64_t>(n_max));
  std::vector<double> x(s);
  for (std::uint64_t n = 0; n < n_max; ++n) {
    gen.next(x);
    for (std::size_t j = 0; j < s; ++j) {
      low[j][n] = static_cast<std::uint64_t>(detail::leading_digits_reflected(x[j], bases[j], g[j]));
    }
  }
  CounterRng rng(derive_key({seed, 0x63686172ULL}));
  double worst = 0.0;
  std::vector<std::uint64_t> k(s);
  for (std::size_t i = 0; i < samples; ++i) {
    for (std::size_t j = 0; j < s; ++j) k[j] = 1 + rng.uniform_below(extent[j] - 1);
    const std::uint64_t count = 1 + rng.uniform_below(n_max);
    FrequencyIndex freq({bases.begin(), bases.end()}, k);
    std::complex<double> sum = 0.0;
    for (std::uint64_t n = 0; n < count; ++n) {
      std::complex<double> term = 1.0;
      for (std::size_t j = 0; j < s; ++j) {
        const auto& info = freq.info(j);
        const auto modulus = static_cast<std::uint64_t>(info.modulus);
        const auto phase = static_cast<u128>(info.reflected) * (low[j][n] % modulus) % modulus;
        term *= unit_root(phase, modulus);
      }
      sum += term;
    }
    const double sin_theta = std::abs(std::sin(std::numbers::pi * freq.theta().value()));
    worst = std::max(worst, std::abs(sum) * sin_theta);
  }
  return worst;
}

/// Direct-summation versus geometric closed form over several (k, N).
inline double check_char_sum_closed_form(std::uint64_t seed) {
  const std::vector<std::uint32_t> bases{2, 3, 5};
  CounterRng rng(derive_key({seed, 0x636c6f73ULL}));
  double worst = 0.0;
  for (int i = 0; i < 40; ++i) {
    std::vector<std::uint64_t> k{rng.uniform_below(64), rng.uniform_below(81), rng.uniform_below(125)};
    const std::uint64_t n = 1 + rng.uniform_below(4096);
    FrequencyIndex freq(bases, k);
    worst = std::max(worst, std::abs(char_sum_halton(freq, n) - char_sum_halton_direct(freq, n)));
  }
  return worst;
}

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// sum over k_j in [p_j^{u_j}, p_j^{u_j+1}) of 1/sin^2(pi sum_j phi_{p_j}(k_j))
/// against (1/3) prod_j p_j^{2 u_j + 2}.
inline BoundCheck check_bdt_small(std::span<const std::uint32_t> bases, std::span<const unsigned> u) {
  validate_bases(bases);
  if (u.size() != bases.size()) throw DimensionMismatch("u length does not match the bases");
  std::vector<std::uint64_t> lo(bases.size()), hi(bases.size());
  double budget = 1.0, rhs = 1.0 / 3.0;
  for (std::size_t j = 0; j < bases.size(); ++j) {
    lo[j] = static_cast<std::uint64_t>(detail::pow_checked(bases[j], u[j]));
    hi[j] = lo[j] * bases[j];
    budget *= static_cast<double>(hi[j]);
    rhs *= static_cast<double>(hi[j]) * static_cast<double>(hi[j]);
  }
  if (budget > 1e6) throw ResourceError("bdt enumeration exceeds 10^6 indices");
  CompensatedSum lhs;
  std::vector<std::uint64_t> k = lo;
  while (true) {
    double theta = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) theta += radical_inverse(bases[j], k[j]);
    const double sn = std::sin(std::numbers::pi * theta);
    lhs.add(1.0 / (sn * sn));
    std::size_t j = 0;
    while (j < k.size() && ++k[j] == hi[j]) {
      k[j] = lo[j];
      ++j;
    }
    if (j == k.size()) break;
  }
  return {lhs.value(), rhs};
}

/// sum_{k < p^g} r_sobolev(p, gamma, k). Literal enumeration up to 2^20
/// terms; beyond that the terms are grouped by (digit length, leading digit),
/// each group holding p^{a-1} equal terms.
inline double r_sum_direct(std::uint32_t p, double gamma, unsigned g) {
  const auto extent = detail::pow_checked(p, g);
  CompensatedSum acc;
  if (extent <= (u128{1} << 20)) {
    for (std::uint64_t k = 0; k < static_cast<std::uint64_t>(extent); ++k) acc.add(r_sobolev(p, gamma, k));
    return acc.value();
  }
  acc.add(r_sobolev(p, gamma, 0));
  double multiplicity = 1.0;
  for (unsigned a = 1; a <= g; ++a) {
    for (Digit kappa = 1; kappa < p; ++kappa) acc.add(multiplicity * r_sobolev_digits(p, gamma, a, kappa));
    multiplicity *= p;
  }
  return acc.value();
}

/// Number of cells whose image under x -> x (+) sigma is hit more or less
/// than once; zero means the shift permutes the p^L cells.
inline std::uint64_t check_measure_preservation(std::uint32_t p, unsigned level, const PAdicNumber& sigma) {
  const auto cells = static_cast<std::uint64_t>(detail::pow_checked(p, level));
  std::vector<std::uint32_t> hits(cells, 0);
  for (std::uint64_t c = 0; c < cells; ++c) {
    const double mid = (static_cast<double>(c) + 0.5) / static_cast<double>(cells);
    const double image = monna_map(monna_inverse(mid, p, sigma.precision()) + sigma);
    const auto target = std::min<std::uint64_t>(cells - 1, static_cast<std::uint64_t>(image * static_cast<double>(cells)));
    ++hits[target];
  }
  return static_cast<std::uint64_t>(std::count_if(hits.begin(), hits.end(), [](auto h) { return h != 1; }));
}

// ---------------------------------------------------------------------------
// Suite
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names{
      "tau",   "sin_sum",      "khat0",   "shift_kernel", "char_sum_bound", "char_sum",  "bdt",
      "gram",  "le2",          "errl2disc", "single_point", "measure",      "lag_series", "randomization"};
  return names;
}

namespace internal {

inline CheckResult at_most(std::string name, double measured, double tolerance) {
  return {std::move(name), measured <= tolerance, measured, tolerance};
}

inline CheckResult run_check(const std::string& name, std::uint64_t seed, unsigned threads) {
  if (name == "tau") {
    double worst = 0.0;
    for (std::uint32_t p : {2u, 3u, 5u}) {
      for (std::uint64_t k = 1; k < std::uint64_t{p} * p * p; ++k) {
        const auto c = check_tau(p, k);
        worst = std::max(worst, c.diff);
        for (double gamma : {0.5, 1.0, 2.0}) {
          worst = std::max(worst, std::abs(-gamma / 2.0 * c.brute_force - r_sobolev(p, gamma, k)));
        }
      }
    }
    return at_most(name, worst, 1e-12);
  }
  if (name == "sin_sum") {
    double worst = 0.0;
    for (std::uint32_t p = 2; p <= 101; ++p) {
      if (is_prime(p)) worst = std::max(worst, check_sin_sum(p).diff);
    }
    return at_most(name, worst, 1e-8);
  }
  if (name == "khat0") return at_most(name, check_khat0(3.0, 4096), 1e-6);
  if (name == "shift_kernel") {
    CounterRng rng(derive_key({seed, 0x6b736800ULL}));
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < 20; ++i) pairs.emplace_back(rng.uniform01(), rng.uniform01());
    const auto two = check_shift_invariant_kernel(2, 1.0, pairs, 12, std::uint64_t{1} << 14);
    const auto three = check_shift_invariant_kernel(3, 1.0, pairs, 8, 19683);
    return at_most(name, std::max(two.max_excess, three.max_excess), 1e-3);
  }
  if (name == "char_sum_bound") {
    const std::vector<std::uint32_t> b2{2, 3}, b3{2, 3, 5};
    const double worst = std::max(check_char_sum_bound(b2, 10000, seed), check_char_sum_bound(b3, 10000, seed));
    return at_most(name, worst, 1.0 + 1e-9);
  }
  if (name == "char_sum") return at_most(name, check_char_sum_closed_form(seed), 1e-10);
  if (name == "bdt") {
    double worst = 0.0;
    const std::vector<std::pair<std::vector<std::uint32_t>, std::vector<unsigned>>> cases{
        {{2}, {0}}, {{3}, {0}}, {{2, 3}, {0, 0}}, {{2}, {5}}, {{3}, {3}}, {{2, 3}, {2, 1}}, {{2, 3, 5}, {1, 1, 0}}};
    for (const auto& [b, u] : cases) {
      const auto c = check_bdt_small(b, u);
      worst = std::max(worst, c.lhs / c.rhs);
    }
    return at_most(name, worst, 1.0);
  }
  if (name == "gram") {
    double worst = 0.0;
    for (auto [p, g] : {std::pair{2u, 4u}, std::pair{3u, 3u}, std::pair{5u, 2u}}) {
      const auto cells = static_cast<std::uint64_t>(pqmc::detail::pow_checked(p, g));
      worst = std::max(worst, gram_check(p, g, cells));
    }
    return at_most(name, worst, 1e-12);
  }
  if (name == "le2") {
    double worst = 0.0;
    for (std::uint32_t p : {2u, 3u, 5u, 7u}) {
      for (double gamma : {0.5, 1.0, 2.0}) {
        for (unsigned g = 0; g <= 12; ++g) {
          const double closed = r_sum_box(p, gamma, g);
          worst = std::max(worst, std::abs(r_sum_direct(p, gamma, g) - closed) / closed);
        }
        worst = std::max(worst, std::abs(r_sum_box(p, gamma, 4000) - r_sum_total(gamma)) / r_sum_total(gamma));
      }
    }
    return at_most(name, worst, 1e-13);
  }
  if (name == "errl2disc") {
    CounterRng rng(derive_key({seed, 0x6c32ULL}));
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const std::size_t s = 1 + rng.uniform_below(3);
      const std::size_t n = 1 + rng.uniform_below(64);
      std::vector<double> gamma(s);
      for (auto& g : gamma) g = 2.0 - 2.0 * rng.uniform01();  // (0, 2]
      PointSet points(s);
      std::vector<double> x(s);
      for (std::size_t m = 0; m < n; ++m) {
        for (auto& c : x) c = rng.uniform01();
        points.push_back(x);
      }
      worst = std::max(worst, std::abs(wce_sq_sobolev(points, gamma) - weighted_l2_sq_subsets(points, gamma)));
    }
    return at_most(name, worst, 1e-10);
  }
  if (name == "single_point") {
    double worst = 0.0;
    for (double gamma : {0.25, 1.0, 1.7}) {
      const double g[] = {gamma};
      for (auto [x, expected] : {std::pair{1.0, gamma / 3.0}, std::pair{0.5, gamma / 12.0}}) {
        PointSet points(1);
        const double xs[] = {x};
        points.push_back(xs);
        worst = std::max(worst, std::abs(weighted_l2_sq_subsets(points, g) - expected));
        worst = std::max(worst, std::abs(wce_sq_sobolev(points, g) - expected));
      }
    }
    return at_most(name, worst, 1e-14);
  }
  if (name == "measure") {
    std::uint64_t bad = 0;
    for (auto [p, level] : {std::pair{2u, 12u}, std::pair{3u, 7u}, std::pair{5u, 5u}}) {
      const std::uint32_t b[] = {p};
      for (std::uint64_t r = 0; r < 4; ++r) {
        bad += check_measure_preservation(p, level, sample_shift(b, default_precision(p), seed, r).sigma[0]);
      }
    }
    return at_most(name, static_cast<double>(bad), 0.0);
  }
  if (name == "lag_series") {
    double worst = -1.0;
    const std::vector<std::uint32_t> bases{2, 3};
    const auto space = sobolev_space(bases, {1.0, 0.5});
    const auto kor = korobov_space(bases, {1.0, 0.5}, {2.0, 3.0});
    for (std::uint64_t n : {1u, 5u, 16u, 27u}) {
      const auto g = default_truncation(bases, n);
      for (const auto* sp : {&space, &kor}) {
        const auto series = error_series(*sp, n, g, threads);
        const double exact = error_lag_exact(*sp, n);
        // exact must lie in [partial, partial + tail]
        worst = std::max(worst, std::max(series.value - exact, exact - series.value - series.tail));
      }
    }
    return at_most(name, worst, 1e-12);
  }
  if (name == "randomization") {
    const auto space = sobolev_space({2}, {1.0});
    const std::uint64_t n = 16;
    const auto g = default_truncation(space.bases, n);
    const auto mc = rms_wce_monte_carlo(space, n, 500, seed, threads);
    const auto series = error_series(space, n, g, threads);
    const double below = series.value - mc.mean;
    const double above = mc.mean - (series.value + series.tail);
    const double outside = std::max({0.0, below, above});
    return at_most(name, outside / mc.stderr_, 3.0);
  }
  throw DomainError("unknown check: " + name);
}

}  // namespace internal

/// Runs the named checks (all of them when `only` is empty) in suite order.
inline std::vector<CheckResult> run_suite(std::uint64_t seed, std::span<const std::string> only = {},
                                          unsigned threads = 1) {
  const auto& names = check_names();
  for (const auto& n : only) {
    if (std::find(names.begin(), names.end(), n) == names.end()) throw DomainError("unknown check: " + n);
  }
  const std::set<std::string> wanted(only.begin(), only.end());
  std::vector<CheckResult> out;
  for (const auto& name : names) {
    if (!wanted.empty() && !wanted.contains(name)) continue;
    out.push_back(internal::run_check(name, seed, threads));
  }
  return out;
}

inline void write_suite_csv(std::ostream& out, std::span<const CheckResult> results) {
  csv::write_row(out, {"name", "status", "measured", "tolerance"});
  for (const auto& r : results) csv::write_row(out, r.csv_row());
}

}  // namespace pqmc::verify
