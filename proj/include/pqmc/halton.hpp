#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pqmc/detail/int128.hpp"
#include "pqmc/padic.hpp"
#include "pqmc/point_set.hpp"
#include "pqmc/primes.hpp"

namespace pqmc {

/// The s-dimensional Halton sequence in bases p_1..p_s, optionally p-adically
/// shifted, read from index start_index onwards.
struct HaltonSpec {
  std::vector<std::uint32_t> bases;
  std::uint64_t start_index = 0;
  std::optional<Shift> shift{};

  std::size_t dimension() const { return bases.size(); }

  void validate() const {
    validate_bases(bases);
    if (shift) shift->validate_against(bases);
  }
};

/// Streaming Halton generator.
///
/// Each coordinate keeps the digits of n (or of n + sigma_j in Z_p for a
/// shifted sequence) together with the exact numerator of their reflection
/// over p^K. Advancing adds one with carry, so the amortized cost per point
/// and coordinate is O(1); the value is the correctly rounded numerator/p^K
/// and matches radical_inverse / monna_map bit for bit.
class HaltonGenerator {
 public:
  explicit HaltonGenerator(HaltonSpec spec) : spec_(std::move(spec)), index_(spec_.start_index) {
    spec_.validate();
    for (std::size_t j = 0; j < spec_.dimension(); ++j) {
      const auto p = spec_.bases[j];
      if (spec_.shift) {
        const auto& sigma = spec_.shift->sigma[j];
        const auto start = PAdicNumber::from_integer(p, sigma.precision(), index_) + sigma;
        coords_.push_back(Coordinate::make(p, {start.digits().begin(), start.digits().end()}, true));
      } else {
        std::vector<Digit> digits;
        for (std::uint64_t n = index_; n != 0; n /= p) digits.push_back(static_cast<Digit>(n % p));
        if (digits.empty()) digits.push_back(0);
        coords_.push_back(Coordinate::make(p, std::move(digits), false));
      }
    }
  }

  const HaltonSpec& spec() const { return spec_; }
  std::size_t dimension() const { return coords_.size(); }

  /// Index of the point the next call to next() returns.
  std::uint64_t index() const { return index_; }

  /// Writes the current point into `out` and advances.
  void next(std::span<double> out) {
    if (out.size() != coords_.size()) throw DimensionMismatch("output span has wrong dimension");
    for (std::size_t j = 0; j < coords_.size(); ++j) {
      out[j] = coords_[j].value();
      coords_[j].increment();
    }
    ++index_;
  }

  std::vector<double> next() {
    std::vector<double> out(coords_.size());
    next(out);
    return out;
  }

 private:
  struct Coordinate {
    std::uint32_t base = 2;
    bool fixed_width = false;
    std::vector<Digit> digits;  // least significant first
    std::vector<u128> weight;   // weight[r] = p^{K-1-r} for r < K, else 0
    u128 numerator = 0;
    u128 denominator = 1;       // p^K, K = number of digits that fit in 126 bits

    static Coordinate make(std::uint32_t p, std::vector<Digit> digits, bool fixed_width) {
      Coordinate c;
      c.base = p;
      c.fixed_width = fixed_width;
      c.digits = std::move(digits);
      c.rebuild_weights();
      for (std::size_t r = 0; r < c.digits.size(); ++r) c.numerator += c.digits[r] * c.weight[r];
      return c;
    }

    void rebuild_weights() {
      std::size_t usable = 0;
      denominator = 1;
      while (usable < digits.size() && denominator <= detail::kDenominatorLimit / base) {
        denominator *= base;
        ++usable;
      }
      weight.assign(digits.size(), 0);
      u128 w = 1;
      for (std::size_t r = usable; r-- > 0;) {
        weight[r] = w;
        w *= base;
      }
    }

    double value() const {
      return detail::clamp_below_one(detail::to_unit_double(numerator, denominator));
    }

    void increment() {
      std::size_t r = 0;
      while (r < digits.size() && digits[r] == base - 1) {
        digits[r] = 0;
        numerator -= static_cast<u128>(base - 1) * weight[r];
        ++r;
      }
      if (r == digits.size()) {
        if (fixed_width) return;  // carry out of digit P-1 is dropped
        if (denominator > detail::kDenominatorLimit / base) {
          throw ResourceError("Halton index exceeds the representable digit range");
        }
        digits.push_back(0);
        numerator *= base;
        rebuild_weights();
      }
      ++digits[r];
      numerator += weight[r];
    }
  };

  HaltonSpec spec_;
  std::uint64_t index_;
  std::vector<Coordinate> coords_;
};

/// Point n of the sequence, evaluated directly (no generator state).
inline UnitPoint halton_point(const HaltonSpec& spec, std::uint64_t n) {
  spec.validate();
  UnitPoint x{{}, spec.bases};
  for (std::size_t j = 0; j < spec.dimension(); ++j) {
    const auto p = spec.bases[j];
    if (spec.shift) {
      const auto& sigma = spec.shift->sigma[j];
      x.coords.push_back(monna_map(PAdicNumber::from_integer(p, sigma.precision(), n) + sigma));
    } else {
      x.coords.push_back(radical_inverse(p, n));
    }
  }
  return x;
}

inline constexpr std::size_t kDefaultPointBudgetBytes = std::size_t{1} << 30;

/// Points start_index .. start_index + count - 1.
inline PointSet halton_block(const HaltonSpec& spec, std::size_t count,
                             std::size_t budget_bytes = kDefaultPointBudgetBytes) {
  if (count == 0) throw DomainError("halton_block requires at least one point");
  spec.validate();
  if (count > budget_bytes / (sizeof(double) * spec.dimension())) {
    throw ResourceError("point block of " + std::to_string(count) +
                        " points exceeds the memory budget; use HaltonGenerator to stream");
  }
  PointSet points(spec.dimension(), spec.bases);
  points.reserve(count);
  HaltonGenerator gen(spec);
  std::vector<double> buf(spec.dimension());
  for (std::size_t n = 0; n < count; ++n) {
    gen.next(buf);
    points.push_back(buf);
  }
  return points;
}

}  // namespace pqmc
