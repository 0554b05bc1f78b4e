#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "pqmc/csv.hpp"
#include "pqmc/exceptions.hpp"
#include "pqmc/halton.hpp"
#include "pqmc/kernels.hpp"
#include "pqmc/padic_functions.hpp"
#include "pqmc/parallel.hpp"
#include "pqmc/point_set.hpp"
#include "pqmc/primes.hpp"
#include "pqmc/stats.hpp"

namespace pqmc {

inline constexpr double kNegativeTolerance = 1e-12;

/// Clamps rounding noise below zero; anything more negative is a bug.
inline double clamp_error_sq(double e_sq) {
  if (e_sq >= 0.0) return e_sq;
  if (e_sq >= -kNegativeTolerance) return 0.0;
  throw NumericalConsistencyError("squared error is negative: " + csv::format_double(e_sq));
}

/// A - (2/N) sum_n B(x_n) + (1/N^2) sum_{m,n} K(x_m, x_n) for every prefix
/// length in `counts` (increasing), from one pass over the points.
///
/// Row sums sum_{m<n} K(x_m, x_n) are computed into per-row slots and then
/// accumulated in index order, so the result does not depend on `threads`.
template <class MeanFn, class KernelFn>
std::vector<double> quadratic_form_prefix(const PointSet& points, std::span<const std::size_t> counts,
                                          double a, MeanFn&& b, KernelFn&& k, unsigned threads = 1) {
  if (counts.empty()) return {};
  if (!std::is_sorted(counts.begin(), counts.end()) || counts.front() == 0) {
    throw DomainError("prefix counts must be positive and increasing");
  }
  const std::size_t n_max = counts.back();
  if (n_max > points.size()) throw DomainError("prefix count exceeds the number of points");

  std::vector<double> rows(n_max);
  parallel_for(n_max, threads, [&](std::size_t n) {
    CompensatedSum row;
    for (std::size_t m = 0; m < n; ++m) row.add(k(points[m], points[n]));
    rows[n] = row.value();
  });

  std::vector<double> out;
  CompensatedSum sum_b, sum_k;
  std::size_t next = 0;
  for (std::size_t n = 0; n < n_max; ++n) {
    sum_b.add(b(points[n]));
    sum_k.add(2.0 * rows[n]);
    sum_k.add(k(points[n], points[n]));
    while (next < counts.size() && counts[next] == n + 1) {
      const auto count = static_cast<double>(n + 1);
      out.push_back(a - 2.0 * sum_b.value() / count + sum_k.value() / (count * count));
      ++next;
    }
  }
  return out;
}

namespace detail {

inline std::vector<double> expand_weights(std::span<const double> gamma, std::size_t s) {
  if (gamma.size() == 1) return std::vector<double>(s, gamma.front());
  if (gamma.size() != s) throw DimensionMismatch("weights do not match the point dimension");
  return {gamma.begin(), gamma.end()};
}

/// int_0^1 |x - y| dy.
inline double mean_abs_distance(double x) { return (x * x + (1.0 - x) * (1.0 - x)) / 2.0; }

}  // namespace detail

/// Squared worst-case errors of the equal-weight rule over each prefix, in a
/// Sobolev space of any anchor. Korobov-type spaces have no closed kernel.
inline std::vector<double> wce_sq_prefix(const WeightedSpace& space, const PointSet& points,
                                         std::span<const std::size_t> counts, unsigned threads = 1) {
  space.validate();
  if (space.is_korobov()) throw DomainError("exact worst-case error needs a Sobolev space");
  if (points.dimension() != space.dimension()) throw DimensionMismatch("points do not match the space");

  const double a = space.product_zero();  // int int K = prod_j r_j(0)
  auto b = [&](std::span<const double> x) {
    double out = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double g = space.gamma[j];
      switch (space.anchor.kind) {
        case AnchorKind::one:
          out *= 1.0 + g * (1.0 - x[j] * x[j]) / 2.0;
          break;
        case AnchorKind::w: {
          const double w = space.anchor.w[j];
          out *= 1.0 + g * 0.5 * (std::abs(x[j] - w) + detail::mean_abs_distance(w) -
                                  detail::mean_abs_distance(x[j]));
          break;
        }
        case AnchorKind::unanchored:
          break;  // both correction terms integrate to zero in y
      }
    }
    return out;
  };
  auto k = [&](std::span<const double> x, std::span<const double> y) { return kernel(space, x, y); };
  auto raw = quadratic_form_prefix(points, counts, a, b, k, threads);
  for (auto& v : raw) v = clamp_error_sq(v);
  return raw;
}

inline double wce_sq(const WeightedSpace& space, const PointSet& points, unsigned threads = 1) {
  if (points.empty()) throw DomainError("worst-case error of an empty point set");
  const std::size_t count = points.size();
  return wce_sq_prefix(space, points, std::span<const std::size_t>(&count, 1), threads).front();
}

/// Squared worst-case error in the Sobolev space anchored at 1. `gamma` holds
/// one weight per coordinate, or a single weight used for all of them.
inline double wce_sq_sobolev(const PointSet& points, std::span<const double> gamma, unsigned threads = 1) {
  auto w = detail::expand_weights(gamma, points.dimension());
  std::vector<std::uint32_t> bases = first_primes(points.dimension());  // only labels the space
  return wce_sq(sobolev_space(std::move(bases), std::move(w)), points, threads);
}

// ---------------------------------------------------------------------------
// Truncation and bounds
// ---------------------------------------------------------------------------

/// ceil(2 log_p N) + 1, computed in integers: the least g0 with p^g0 >= N^2, plus one.
inline unsigned default_truncation(std::uint32_t p, std::uint64_t n) {
  require_prime(p);
  if (n == 0) throw DomainError("truncation needs N >= 1");
  const u128 target = static_cast<u128>(n) * n;
  unsigned g0 = 0;
  for (u128 power = 1; power < target; power *= p) ++g0;
  return g0 + 1;
}

inline std::vector<unsigned> default_truncation(std::span<const std::uint32_t> bases, std::uint64_t n) {
  std::vector<unsigned> g;
  for (auto p : bases) g.push_back(default_truncation(p, n));
  return g;
}

/// (1/N^2) [prod_j (1 + gamma_j log N p_j^2 / log p_j) + prod_j (1 + gamma_j / 2) prod_j (1 + gamma_j p_j / 6)].
inline double theory_bound_sobolev(std::span<const std::uint32_t> bases, std::span<const double> gamma,
                                   std::uint64_t n) {
  validate_bases(bases);
  if (gamma.size() != bases.size()) throw DimensionMismatch("gamma length does not match the bases");
  if (n < 2) throw DomainError("theory bound needs N >= 2");
  const double log_n = std::log(static_cast<double>(n));
  double first = 1.0, total = 1.0, second = 1.0;
  for (std::size_t j = 0; j < bases.size(); ++j) {
    const double p = bases[j];
    first *= 1.0 + gamma[j] * log_n * p * p / std::log(p);
    total *= 1.0 + gamma[j] / 2.0;
    second *= 1.0 + gamma[j] * p / 6.0;
  }
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  return (first + total * second) / nn;
}

/// (1/N^2) [prod_j (1 + 2 gamma_j p_j^2 log N) + prod_j (1 + gamma_j p_j) prod_j (1 + gamma_j p_j^2)],
/// the Korobov-type bound for alpha_j >= 2.
inline double theory_bound_korobov(std::span<const std::uint32_t> bases, std::span<const double> gamma,
                                   std::uint64_t n) {
  validate_bases(bases);
  if (gamma.size() != bases.size()) throw DimensionMismatch("gamma length does not match the bases");
  if (n < 2) throw DomainError("theory bound needs N >= 2");
  const double log_n = std::log(static_cast<double>(n));
  double first = 1.0, second = 1.0, third = 1.0;
  for (std::size_t j = 0; j < bases.size(); ++j) {
    const double p = bases[j];
    first *= 1.0 + 2.0 * gamma[j] * p * p * log_n;
    second *= 1.0 + gamma[j] * p;
    third *= 1.0 + gamma[j] * p * p;
  }
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  return (first + second * third) / nn;
}

/// (1/N^2)(-1 + prod_j (1 + 2 gamma_j p_j^2)), valid only when every alpha_j > 2.
inline std::optional<double> theory_bound_korobov_sharp(std::span<const std::uint32_t> bases,
                                                        std::span<const double> gamma,
                                                        std::span<const double> alpha, std::uint64_t n) {
  validate_bases(bases);
  if (gamma.size() != bases.size() || alpha.size() != bases.size()) {
    throw DimensionMismatch("gamma/alpha length does not match the bases");
  }
  if (n == 0) throw DomainError("theory bound needs N >= 1");
  if (std::any_of(alpha.begin(), alpha.end(), [](double a) { return !(a > 2.0); })) return std::nullopt;
  double prod = 1.0;
  for (std::size_t j = 0; j < bases.size(); ++j) {
    const double p = bases[j];
    prod *= 1.0 + 2.0 * gamma[j] * p * p;
  }
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  return (prod - 1.0) / nn;
}

/// c_K = -1 + prod_j (1 + gamma_j p_j^alpha_j (p_j - 1) / (p_j^alpha_j - p_j)), the
/// squared error of the one-point rule {0} in the Korobov-type space.
inline double korobov_constant(std::span<const std::uint32_t> bases, std::span<const double> gamma,
                               std::span<const double> alpha) {
  validate_bases(bases);
  if (gamma.size() != bases.size() || alpha.size() != bases.size()) {
    throw DimensionMismatch("gamma/alpha length does not match the bases");
  }
  double prod = 1.0;
  for (std::size_t j = 0; j < bases.size(); ++j) {
    require_alpha(alpha[j]);
    const double p = bases[j];
    const double pa = std::pow(p, alpha[j]);
    prod *= 1.0 + gamma[j] * pa * (p - 1.0) / (pa - p);
  }
  return prod - 1.0;
}

// ---------------------------------------------------------------------------
// Series and exact shift-averaged errors
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kDefaultSeriesTermBudget = std::uint64_t{1} << 32;

/// sum over k in the punctured box Delta*(g) of r(k) |S_N(k) / N|^2 for the
/// unshifted Halton sequence in the bases of `space`, with the coefficient mass
/// outside the box as tail bound (|S_N / N| <= 1).
///
/// For a Sobolev space this is the squared RMS worst-case error over random
/// shifts; for a Korobov-type space it is the squared worst-case error of the
/// unshifted sequence.
inline SeriesValue error_series(const WeightedSpace& space, std::uint64_t n, std::span<const unsigned> g,
                                unsigned threads = 1,
                                std::uint64_t term_budget = kDefaultSeriesTermBudget) {
  space.validate();
  if (n == 0) throw DomainError("error series needs N >= 1");
  IndexBox box{space.bases, {g.begin(), g.end()}, BoxMode::full};
  box.validate();
  const auto count = box.count();
  if (!count || *count > term_budget) {
    throw ResourceError("index box exceeds the series term budget; lower g or use the lag closed form");
  }
  const std::size_t s = space.dimension();

  // theta over the common denominator D = prod_j p_j^{g_j}, per coordinate.
  u128 denominator = 1;
  for (std::size_t j = 0; j < s; ++j) denominator *= box.extent(j);
  std::vector<std::vector<u128>> numerators(s);
  std::vector<std::vector<double>> coefficients(s);
  for (std::size_t j = 0; j < s; ++j) {
    const auto extent = box.extent(j);
    const u128 cofactor = denominator / extent;
    numerators[j].resize(extent);
    coefficients[j].resize(extent);
    for (std::uint64_t k = 0; k < extent; ++k) {
      const auto info = digit_info(space.bases[j], k);
      const u128 lift = extent / info.modulus;  // p^{g - a}
      numerators[j][k] = info.reflected * lift * cofactor;
      coefficients[j][k] = space.coefficient(j, k);
    }
  }

  const double inv_n_sq = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  // Split on the last coordinate; each slot sums the inner box in odometer order.
  const std::size_t outer = s - 1;
  const auto outer_extent = box.extent(outer);
  std::vector<double> slots(outer_extent);
  parallel_for(outer_extent, threads, [&](std::size_t k_outer) {
    CompensatedSum acc;
    std::vector<std::uint64_t> k(s, 0);
    k[outer] = k_outer;
    while (true) {
      u128 num = 0;
      double r = 1.0;
      bool zero = true;
      for (std::size_t j = 0; j < s; ++j) {
        num += numerators[j][k[j]];
        if (num >= denominator) num -= denominator;
        r *= coefficients[j][k[j]];
        zero = zero && k[j] == 0;
      }
      if (!zero) acc.add(r * fejer_sq(num, denominator, n) * inv_n_sq);
      std::size_t j = 0;
      while (j < outer && ++k[j] == box.extent(j)) k[j++] = 0;
      if (j == outer) break;
    }
    slots[k_outer] = acc.value();
  });
  return {compensated_sum(slots), space.tail_outside_box(g)};
}

/// Squared RMS worst-case error of the randomly p-adically shifted Halton
/// sequence, as a truncated series with certified tail.
inline SeriesValue rms_wce_series(std::span<const std::uint32_t> bases, std::span<const double> gamma,
                                  std::uint64_t n, std::span<const unsigned> g, unsigned threads = 1) {
  return error_series(sobolev_space({bases.begin(), bases.end()}, {gamma.begin(), gamma.end()}), n, g,
                      threads);
}

/// The exact value of error_series with g -> infinity, for every N in `counts`.
///
/// Between Halton points x_m and x_n the shift-invariant kernel depends only
/// on d = m - n, so the error is N^-2 sum_{|d|<N} (N - |d|) h(d) with
/// h(d) = prod_j f_j(d) - prod_j r_j(0). Cost O(s N) instead of a box sum.
inline std::vector<double> error_lag_exact(const WeightedSpace& space, std::span<const std::uint64_t> counts) {
  space.validate();
  if (counts.empty()) return {};
  const auto n_max = *std::max_element(counts.begin(), counts.end());
  if (n_max == 0) throw DomainError("error needs N >= 1");
  const double base = space.product_zero();
  std::vector<double> h(n_max);
  for (std::uint64_t d = 0; d < n_max; ++d) {
    double prod = 1.0;
    for (std::size_t j = 0; j < space.dimension(); ++j) {
      prod *= shift_invariant_kernel_lag(space, j, static_cast<std::int64_t>(d));
    }
    h[d] = prod - base;
  }
  std::vector<double> out;
  for (auto n : counts) {
    if (n == 0) throw DomainError("error needs N >= 1");
    const auto nd = static_cast<double>(n);
    CompensatedSum acc;
    acc.add(nd * h[0]);
    for (std::uint64_t d = 1; d < n; ++d) acc.add(2.0 * static_cast<double>(n - d) * h[d]);
    out.push_back(clamp_error_sq(acc.value() / (nd * nd)));
  }
  return out;
}

inline double error_lag_exact(const WeightedSpace& space, std::uint64_t n) {
  return error_lag_exact(space, std::span<const std::uint64_t>(&n, 1)).front();
}

/// Squared worst-case error of the unshifted Halton sequence in a
/// Korobov-type space, with the bounds that apply to it.
struct KorobovReport {
  SeriesValue series;
  double bound = 0.0;                 ///< valid for alpha_j >= 2
  std::optional<double> sharp_bound;  ///< only when every alpha_j > 2
};

inline KorobovReport wce_sq_korobov(std::span<const std::uint32_t> bases, std::span<const double> alpha,
                                    std::span<const double> gamma, std::uint64_t n,
                                    std::span<const unsigned> g, unsigned threads = 1) {
  auto space = korobov_space({bases.begin(), bases.end()}, {gamma.begin(), gamma.end()},
                             {alpha.begin(), alpha.end()});
  KorobovReport report;
  report.series = error_series(space, n, g, threads);
  report.bound = theory_bound_korobov(bases, gamma, std::max<std::uint64_t>(n, 2));
  report.sharp_bound = theory_bound_korobov_sharp(bases, gamma, alpha, n);
  return report;
}

// ---------------------------------------------------------------------------
// Monte Carlo over random shifts
// ---------------------------------------------------------------------------

struct MonteCarloEstimate {
  std::uint64_t n = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t replicates = 0;
  double min = 0.0;
  std::size_t argmin = 0;  ///< replicate index of the smallest value
};

namespace detail {

/// Runs `per_replicate(points) -> values per count` on M shifted Halton
/// prefixes and summarizes each count over replicates.
template <class Fn>
std::vector<MonteCarloEstimate> shifted_replicates(std::span<const std::uint32_t> bases,
                                                   std::span<const std::uint64_t> counts, std::size_t m,
                                                   std::uint64_t seed, unsigned threads, Fn&& per_replicate) {
  if (m < 2) throw DomainError("Monte Carlo needs at least 2 replicates");
  if (counts.empty()) throw DomainError("no sample sizes given");
  validate_bases(bases);
  std::vector<std::size_t> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.front() == 0) throw DomainError("sample sizes must be positive");
  const auto precision = shared_precision(bases);

  std::vector<std::vector<double>> values(m);
  parallel_for(m, threads, [&](std::size_t r) {
    HaltonSpec spec{{bases.begin(), bases.end()}, 0, sample_shift(bases, precision, seed, r)};
    const auto points = halton_block(spec, sorted.back());
    values[r] = per_replicate(points, std::span<const std::size_t>(sorted));
  });

  std::vector<MonteCarloEstimate> out;
  for (auto n : counts) {
    const auto idx = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), n) - sorted.begin());
    std::vector<double> sample(m);
    for (std::size_t r = 0; r < m; ++r) sample[r] = values[r][idx];
    const auto stats = mean_stderr(sample);
    MonteCarloEstimate est{n, stats.mean, stats.stderr_, m, sample[0], 0};
    for (std::size_t r = 1; r < m; ++r) {
      if (sample[r] < est.min) {
        est.min = sample[r];
        est.argmin = r;
      }
    }
    out.push_back(est);
  }
  return out;
}

}  // namespace detail

/// Mean and standard error of e^2 over M independent p-adic shifts of the
/// Halton sequence; replicate r uses sample_shift(bases, P, seed, r).
inline std::vector<MonteCarloEstimate> rms_wce_monte_carlo(const WeightedSpace& space,
                                                           std::span<const std::uint64_t> counts,
                                                           std::size_t m, std::uint64_t seed,
                                                           unsigned threads = 1) {
  space.validate();
  return detail::shifted_replicates(space.bases, counts, m, seed, threads,
                                    [&](const PointSet& points, std::span<const std::size_t> sizes) {
                                      return wce_sq_prefix(space, points, sizes);
                                    });
}

inline MonteCarloEstimate rms_wce_monte_carlo(const WeightedSpace& space, std::uint64_t n, std::size_t m,
                                              std::uint64_t seed, unsigned threads = 1) {
  return rms_wce_monte_carlo(space, std::span<const std::uint64_t>(&n, 1), m, seed, threads).front();
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// One row of the `error` command output.
struct ErrorReport {
  std::string space;  ///< "sobolev" or "korobov"
  std::size_t s = 0;
  std::uint64_t n = 0;
  std::optional<std::size_t> replicates;
  std::optional<double> e_sq;  ///< exact value, or the Monte Carlo mean
  std::optional<double> e_sq_stderr;
  std::optional<SeriesValue> series;
  std::optional<double> theory_bound;
  std::optional<std::uint64_t> seed;

  static std::vector<std::string> csv_header() {
    return {"space", "s", "N", "M", "e_sq_mean", "e_sq_stderr", "series_value", "series_tail",
            "theory_bound", "seed"};
  }

  std::vector<std::string> csv_row() const {
    auto opt_int = [](const auto& v) { return v ? std::to_string(*v) : std::string{}; };
    return {space,
            std::to_string(s),
            std::to_string(n),
            opt_int(replicates),
            csv::format_optional(e_sq),
            csv::format_optional(e_sq_stderr),
            series ? csv::format_double(series->value) : std::string{},
            series ? csv::format_double(series->tail) : std::string{},
            csv::format_optional(theory_bound),
            opt_int(seed)};
  }

  /// key=value record, one field per line, absent fields omitted.
  std::string to_text() const {
    std::ostringstream out;
    const auto header = csv_header();
    const auto row = csv_row();
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (!row[i].empty()) out << header[i] << '=' << row[i] << '\n';
    }
    return out.str();
  }
};

// ---------------------------------------------------------------------------
// Weight conditions
// ---------------------------------------------------------------------------

/// Partial sums up to J of sum gamma_j p_j^2 / log p_j (p_j the j-th prime),
/// sum gamma_j^{1/2} j log j and sum gamma_j j^2 log j, with their last increments.
struct WeightConditionSums {
  std::size_t j = 0;
  double prime_series = 0.0;
  double sqrt_series = 0.0;
  double square_series = 0.0;
  double prime_increment = 0.0;
  double sqrt_increment = 0.0;
  double square_increment = 0.0;
};

/// One entry per checkpoint (each <= J), plus J itself.
inline std::vector<WeightConditionSums> weight_condition_partial_sums(const std::function<double(std::size_t)>& gamma,
                                                                      std::size_t cutoff,
                                                                      std::span<const std::size_t> checkpoints = {}) {
  if (cutoff < 1) throw DomainError("weight condition cutoff must be at least 1");
  const auto primes = first_primes(cutoff);
  std::vector<std::size_t> marks(checkpoints.begin(), checkpoints.end());
  marks.push_back(cutoff);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  std::vector<WeightConditionSums> out;
  CompensatedSum prime_sum, sqrt_sum, square_sum;
  WeightConditionSums cur;
  std::size_t next = 0;
  for (std::size_t j = 1; j <= cutoff && next < marks.size(); ++j) {
    const double g = gamma(j);
    if (g < 0.0) throw DomainError("weights must be nonnegative");
    const double p = primes[j - 1];
    const double jd = static_cast<double>(j);
    cur.prime_increment = g * p * p / std::log(p);
    cur.sqrt_increment = std::sqrt(g) * jd * std::log(jd);
    cur.square_increment = g * jd * jd * std::log(jd);
    prime_sum.add(cur.prime_increment);
    sqrt_sum.add(cur.sqrt_increment);
    square_sum.add(cur.square_increment);
    if (j == marks[next]) {
      cur.j = j;
      cur.prime_series = prime_sum.value();
      cur.sqrt_series = sqrt_sum.value();
      cur.square_series = square_sum.value();
      out.push_back(cur);
      ++next;
    }
  }
  return out;
}

}  // namespace pqmc
