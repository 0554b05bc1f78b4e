#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "pqmc/csv.hpp"
#include "pqmc/exceptions.hpp"

namespace pqmc {

/// N points of the closed cube [0,1]^s stored row-major. The bases are those of
/// the generating sequence and may be empty for externally supplied points.
class PointSet {
 public:
  explicit PointSet(std::size_t dimension, std::vector<std::uint32_t> bases = {})
      : dimension_(dimension), bases_(std::move(bases)) {
    if (dimension_ == 0) throw DimensionMismatch("point set dimension must be at least 1");
    if (!bases_.empty() && bases_.size() != dimension_) {
      throw DimensionMismatch("point set bases do not match its dimension");
    }
  }

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return coords_.size() / dimension_; }
  bool empty() const { return coords_.empty(); }
  std::span<const std::uint32_t> bases() const { return bases_; }
  std::span<const double> coords() const { return coords_; }

  std::span<const double> operator[](std::size_t n) const {
    return std::span<const double>(coords_).subspan(n * dimension_, dimension_);
  }

  void reserve(std::size_t n) { coords_.reserve(n * dimension_); }

  void push_back(std::span<const double> point) {
    if (point.size() != dimension_) {
      throw DimensionMismatch("point has " + std::to_string(point.size()) +
                              " coordinates, expected " + std::to_string(dimension_));
    }
    for (double c : point) {
      if (!(c >= 0.0 && c <= 1.0)) throw DomainError("point coordinate outside [0,1]");
    }
    coords_.insert(coords_.end(), point.begin(), point.end());
  }

  /// The first n points.
  PointSet prefix(std::size_t n) const {
    if (n > size()) throw DomainError("prefix longer than the point set");
    PointSet out(dimension_, bases_);
    out.coords_.assign(coords_.begin(),
                       coords_.begin() + static_cast<std::ptrdiff_t>(n * dimension_));
    return out;
  }

  /// Projection onto the coordinates listed in `coordinates`.
  PointSet project(std::span<const std::size_t> coordinates) const {
    std::vector<std::uint32_t> bases;
    for (auto j : coordinates) {
      if (j >= dimension_) throw DimensionMismatch("projection coordinate out of range");
      if (!bases_.empty()) bases.push_back(bases_[j]);
    }
    PointSet out(coordinates.size(), std::move(bases));
    out.reserve(size());
    std::vector<double> buf(coordinates.size());
    for (std::size_t n = 0; n < size(); ++n) {
      for (std::size_t i = 0; i < coordinates.size(); ++i) buf[i] = (*this)[n][coordinates[i]];
      out.push_back(buf);
    }
    return out;
  }

 private:
  std::size_t dimension_;
  std::vector<std::uint32_t> bases_;
  std::vector<double> coords_;
};

/// CSV with header `n,x1,...,xs`, one row per point, 17 significant digits.
inline void write_points_csv(std::ostream& out, const PointSet& points,
                             std::uint64_t first_index = 0) {
  std::vector<std::string> row{"n"};
  for (std::size_t j = 0; j < points.dimension(); ++j) row.push_back("x" + std::to_string(j + 1));
  csv::write_row(out, row);
  for (std::size_t n = 0; n < points.size(); ++n) {
    row.assign(1, std::to_string(first_index + n));
    for (double c : points[n]) row.push_back(csv::format_double(c));
    csv::write_row(out, row);
  }
}

/// Reads the format written by write_points_csv; the `n` column is optional.
inline PointSet read_points_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("points file is empty");
  const auto header = csv::split(line);
  const std::size_t skip = (!header.empty() && header.front() == "n") ? 1 : 0;
  if (header.size() <= skip) throw DimensionMismatch("points file has no coordinate columns");
  PointSet points(header.size() - skip);
  std::vector<double> buf(points.dimension());
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split(line);
    if (fields.size() != header.size()) {
      throw DimensionMismatch("points row has " + std::to_string(fields.size()) +
                              " fields, expected " + std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < buf.size(); ++j) buf[j] = std::stod(fields[skip + j]);
    points.push_back(buf);
  }
  return points;
}

}  // namespace pqmc
