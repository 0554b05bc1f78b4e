#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pqmc/exceptions.hpp"
#include "pqmc/point_set.hpp"
#include "pqmc/stats.hpp"
#include "pqmc/worst_case.hpp"

namespace pqmc {

/// Delta_N(t) = #{n : x_n in [0, t)} / N - prod_i t_i.
inline double local_discrepancy(const PointSet& points, std::span<const double> t) {
  if (t.size() != points.dimension()) throw DimensionMismatch("box corner does not match the point dimension");
  if (points.empty()) throw DomainError("local discrepancy of an empty point set");
  double volume = 1.0;
  for (double c : t) {
    if (!(c >= 0.0 && c <= 1.0)) throw DomainError("box corner outside [0,1]");
    volume *= c;
  }
  std::size_t inside = 0;
  for (std::size_t n = 0; n < points.size(); ++n) {
    const auto x = points[n];
    bool in = true;
    for (std::size_t i = 0; i < t.size() && in; ++i) in = x[i] < t[i];
    inside += in ? 1 : 0;
  }
  return static_cast<double>(inside) / static_cast<double>(points.size()) - volume;
}

enum class DiscrepancyMethod { closed_form, subsets, quadrature };

struct DiscrepancyResult {
  double l2_sq = 0.0;
  DiscrepancyMethod method = DiscrepancyMethod::closed_form;
  std::size_t resolution = 0;  ///< grid cells per axis, quadrature only
};

/// Squared weighted L2-discrepancy, through its identity with the squared
/// worst-case error in the Sobolev space anchored at 1.
inline double weighted_l2_sq(const PointSet& points, std::span<const double> gamma, unsigned threads = 1) {
  return wce_sq_sobolev(points, gamma, threads);
}

inline constexpr std::size_t kMaxSubsetDimension = 20;

/// Squared weighted L2-discrepancy from its definition:
/// sum over nonempty u of gamma_u int |Delta_N((t_u, 1))|^2 dt_u, each term by
/// Warnock's formula on the projection onto u.
///
/// Subsets are visited depth first; each level keeps the running products
/// prod_{j in u} (1 - x_j^2)/2 and prod_{j in u} (1 - max(x_mj, x_nj)).
inline double weighted_l2_sq_subsets(const PointSet& points, std::span<const double> gamma) {
  const std::size_t s = points.dimension();
  if (s > kMaxSubsetDimension) {
    throw DomainError("subset enumeration is limited to s <= " + std::to_string(kMaxSubsetDimension));
  }
  if (points.empty()) throw DomainError("discrepancy of an empty point set");
  const auto w = detail::expand_weights(gamma, s);
  const std::size_t n = points.size();
  const auto nd = static_cast<double>(n);

  struct Level {
    double weight;   // gamma_u
    double volume;   // 3^{-|u|}
    std::vector<double> single;  // per point
    std::vector<double> pair;    // per pair, row-major upper triangle including diagonal
  };
  std::vector<Level> stack;
  stack.push_back({1.0, 1.0, std::vector<double>(n, 1.0), std::vector<double>(n * n, 1.0)});

  CompensatedSum total;
  // Extends the subset on top of the stack by coordinate j and recurses on j+1..s-1.
  auto visit = [&](auto&& self, std::size_t j) -> void {
    const Level& top = stack.back();
    Level next{top.weight * w[j], top.volume / 3.0, top.single, top.pair};
    for (std::size_t a = 0; a < n; ++a) {
      const double xa = points[a][j];
      next.single[a] *= (1.0 - xa * xa) / 2.0;
      for (std::size_t b = a; b < n; ++b) next.pair[a * n + b] *= 1.0 - std::max(xa, points[b][j]);
    }
    CompensatedSum single, pair;
    for (std::size_t a = 0; a < n; ++a) {
      single.add(next.single[a]);
      pair.add(next.pair[a * n + a]);
      for (std::size_t b = a + 1; b < n; ++b) pair.add(2.0 * next.pair[a * n + b]);
    }
    total.add(next.weight * (next.volume - 2.0 * single.value() / nd + pair.value() / (nd * nd)));
    stack.push_back(std::move(next));
    for (std::size_t i = j + 1; i < s; ++i) self(self, i);
    stack.pop_back();
  };
  for (std::size_t j = 0; j < s; ++j) visit(visit, j);
  return clamp_error_sq(total.value());
}

/// Warnock's formula for the unweighted L2 star discrepancy, every prefix in
/// `counts`: 3^-s - (2/N) sum_n prod_j (1 - x_nj^2)/2 + (1/N^2) sum_{m,n} prod_j (1 - max).
inline std::vector<double> unweighted_l2_sq_prefix(const PointSet& points, std::span<const std::size_t> counts,
                                                   unsigned threads = 1) {
  const double a = std::pow(3.0, -static_cast<double>(points.dimension()));
  auto b = [](std::span<const double> x) {
    double out = 1.0;
    for (double c : x) out *= (1.0 - c * c) / 2.0;
    return out;
  };
  auto k = [](std::span<const double> x, std::span<const double> y) {
    double out = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j) out *= 1.0 - std::max(x[j], y[j]);
    return out;
  };
  auto raw = quadratic_form_prefix(points, counts, a, b, k, threads);
  for (auto& v : raw) v = clamp_error_sq(v);
  return raw;
}

inline double unweighted_l2_sq(const PointSet& points, unsigned threads = 1) {
  if (points.empty()) throw DomainError("discrepancy of an empty point set");
  const std::size_t count = points.size();
  return unweighted_l2_sq_prefix(points, std::span<const std::size_t>(&count, 1), threads).front();
}

/// Midpoint-rule oracle for the weighted (gamma given) or unweighted (gamma
/// empty) squared L2-discrepancy, s <= 2, on a `resolution`^|u| grid per
/// subset u. Box counts come from cumulative histograms, not from the
/// closed forms.
inline DiscrepancyResult l2_sq_quadrature(const PointSet& points, std::span<const double> gamma,
                                          std::size_t resolution) {
  const std::size_t s = points.dimension();
  if (s > 2) throw DomainError("quadrature oracle supports s <= 2 only");
  if (resolution == 0) throw DomainError("quadrature resolution must be positive");
  if (points.empty()) throw DomainError("discrepancy of an empty point set");
  const bool weighted = !gamma.empty();
  const auto w = weighted ? detail::expand_weights(gamma, s) : std::vector<double>(s, 1.0);
  const auto nd = static_cast<double>(points.size());
  const auto grid = static_cast<double>(resolution);
  auto mid = [&](std::size_t i) { return (static_cast<double>(i) + 0.5) / grid; };
  // First grid index whose midpoint exceeds x; the point counts for t_i iff x < t_i.
  auto first_above = [&](double x) {
    auto i = static_cast<std::size_t>(std::max(0.0, std::floor(x * grid - 0.5)));
    while (i > 0 && mid(i - 1) > x) --i;
    while (i < resolution && !(x < mid(i))) ++i;
    return i;
  };

  CompensatedSum total;
  const std::size_t subsets = std::size_t{1} << s;
  for (std::size_t u = 1; u < subsets; ++u) {
    if (!weighted && u != subsets - 1) continue;
    std::vector<std::size_t> coords;
    double weight = 1.0;
    for (std::size_t j = 0; j < s; ++j) {
      if (u & (std::size_t{1} << j)) {
        coords.push_back(j);
        weight *= w[j];
      }
    }
    // Projection onto u: coordinates outside u do not restrict the count.
    CompensatedSum integral;
    if (coords.size() == 1) {
      std::vector<double> hist(resolution + 1, 0.0);
      for (std::size_t n = 0; n < points.size(); ++n) hist[first_above(points[n][coords[0]])] += 1.0;
      double running = 0.0;
      for (std::size_t i = 0; i < resolution; ++i) {
        running += hist[i];
        const double delta = running / nd - mid(i);
        integral.add(delta * delta);
      }
      total.add(weight * integral.value() / grid);
    } else {
      std::vector<double> hist((resolution + 1) * (resolution + 1), 0.0);
      for (std::size_t n = 0; n < points.size(); ++n) {
        hist[first_above(points[n][0]) * (resolution + 1) + first_above(points[n][1])] += 1.0;
      }
      std::vector<double> column(resolution + 1, 0.0);  // cumulative over the first axis
      for (std::size_t i = 0; i < resolution; ++i) {
        double running = 0.0;
        for (std::size_t k = 0; k < resolution; ++k) {
          column[k] += hist[i * (resolution + 1) + k];
          running += column[k];
          const double delta = running / nd - mid(i) * mid(k);
          integral.add(delta * delta);
        }
      }
      total.add(weight * integral.value() / (grid * grid));
    }
  }
  return {total.value(), DiscrepancyMethod::quadrature, resolution};
}

struct L2Record {
  std::uint64_t n = 0;
  double mean = 0.0;    ///< Monte Carlo mean of the squared discrepancy
  double stderr_ = 0.0;
  double rms = 0.0;     ///< sqrt(mean)
  double ratio = 0.0;   ///< N rms / (log N)^{s/2}
  double min = 0.0;
  std::size_t argmin = 0;
};

struct L2Experiment {
  std::vector<L2Record> records;
  std::optional<LinearFit> fit;  ///< log rms against log N, when the grid has at least 4 points
};

/// RMS unweighted L2-discrepancy of the p-adically shifted Halton sequence
/// over an increasing N grid; each replicate is one O(N_max^2) prefix pass.
inline L2Experiment rms_l2_experiment(std::span<const std::uint32_t> bases, std::span<const std::uint64_t> grid,
                                      std::size_t m, std::uint64_t seed, unsigned threads = 1) {
  if (grid.empty()) throw DomainError("empty N grid");
  if (!std::is_sorted(grid.begin(), grid.end()) ||
      std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
    throw DomainError("N grid must be strictly increasing");
  }
  const auto estimates = detail::shifted_replicates(
      bases, grid, m, seed, threads, [](const PointSet& points, std::span<const std::size_t> sizes) {
        return unweighted_l2_sq_prefix(points, sizes);
      });
  L2Experiment out;
  const double half_s = static_cast<double>(bases.size()) / 2.0;
  std::vector<double> ns, rms;
  for (const auto& e : estimates) {
    L2Record rec{e.n, e.mean, e.stderr_, std::sqrt(e.mean), 0.0, e.min, e.argmin};
    const double log_n = std::log(static_cast<double>(e.n));
    rec.ratio = e.n >= 2 ? static_cast<double>(e.n) * rec.rms / std::pow(log_n, half_s) : 0.0;
    out.records.push_back(rec);
    ns.push_back(static_cast<double>(e.n));
    rms.push_back(rec.rms);
  }
  if (ns.size() >= 4) out.fit = fit_loglog(ns, rms);
  return out;
}

}  // namespace pqmc
