#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "pqmc/exceptions.hpp"

namespace pqmc {

/// Neumaier-compensated running sum. The result depends only on the order of
/// additions, never on how work was scheduled.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }

  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;  ///< sqrt(unbiased variance / M)
  std::size_t count = 0;
};

inline MeanStderr mean_stderr(std::span<const double> xs) {
  if (xs.empty()) throw DomainError("mean of an empty sample");
  MeanStderr out;
  out.count = xs.size();
  out.mean = compensated_sum(xs) / static_cast<double>(xs.size());
  if (xs.size() < 2) return out;
  CompensatedSum sq;
  for (double x : xs) sq.add((x - out.mean) * (x - out.mean));
  const double variance = sq.value() / static_cast<double>(xs.size() - 1);
  out.stderr_ = std::sqrt(variance / static_cast<double>(xs.size()));
  return out;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares of y on x.
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionMismatch("fit: x and y lengths differ");
  if (x.size() < 2) throw DomainError("fit needs at least two points");
  const auto n = static_cast<double>(x.size());
  const double mx = compensated_sum(x) / n;
  const double my = compensated_sum(y) / n;
  CompensatedSum sxx, sxy, syy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx.add((x[i] - mx) * (x[i] - mx));
    sxy.add((x[i] - mx) * (y[i] - my));
    syy.add((y[i] - my) * (y[i] - my));
  }
  if (sxx.value() == 0.0) throw DomainError("fit: x values are all equal");
  LinearFit fit;
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy.value() == 0.0 ? 1.0 : (sxy.value() * sxy.value()) / (sxx.value() * syy.value());
  return fit;
}

/// Slope of log(y) against log(x).
inline LinearFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionMismatch("fit: x and y lengths differ");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw DomainError("log-log fit needs positive data");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_line(lx, ly);
}

}  // namespace pqmc
