#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "pqmc/csv.hpp"
#include "pqmc/exceptions.hpp"
#include "pqmc/primes.hpp"

namespace pqmc {

/// Thrown for malformed or inconsistent experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Declarative description of one CLI run. Every field is optional so that
/// command-line flags and a JSON file can be merged field by field.
struct ExperimentConfig {
  std::optional<std::vector<std::uint32_t>> bases;
  std::optional<std::size_t> s;
  std::optional<bool> first_primes;
  std::optional<std::string> gamma;  ///< "1.5", "pow:4" or "1,0.5,0.25"
  std::optional<std::string> alpha;  ///< "2" or "2,3"
  std::optional<std::vector<std::uint64_t>> n;
  std::optional<std::uint64_t> n_min;
  std::optional<std::uint64_t> n_max;
  std::optional<double> factor;
  std::optional<std::uint64_t> start;
  std::optional<std::size_t> replicates;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<unsigned>> g;
  std::optional<std::string> shift;  ///< "seed:replicate"
  std::optional<std::string> shift_out;
  std::optional<std::string> method;
  std::optional<std::string> space;
  std::optional<std::string> metric;
  std::optional<std::string> points;
  std::optional<std::vector<double>> point;
  std::optional<std::size_t> resolution;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::optional<std::vector<std::string>> only;
};

namespace config {

template <class T>
T parse_number(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    T value{};
    if constexpr (std::is_floating_point_v<T>) {
      value = static_cast<T>(std::stod(text, &used));
    } else {
      if (!text.empty() && text.front() == '-') throw ConfigError(what + " must be nonnegative: " + text);
      value = static_cast<T>(std::stoull(text, &used));
    }
    if (used != text.size()) throw ConfigError("invalid " + what + ": " + text);
    return value;
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const ConfigError*>(&e) != nullptr) throw;
    throw ConfigError("invalid " + what + ": '" + text + "'");
  }
}

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& what) {
  std::vector<T> out;
  for (const auto& field : csv::split(text)) out.push_back(parse_number<T>(field, what));
  return out;
}

/// Weights for s coordinates: a constant ("1.5"), a power law j^-c ("pow:c",
/// c > 0) or an explicit list with one entry per coordinate.
inline std::vector<double> parse_weights(const std::string& spec, std::size_t s) {
  if (spec.rfind("pow:", 0) == 0) {
    const double c = parse_number<double>(spec.substr(4), "power-law exponent");
    if (!(c > 0.0)) throw ConfigError("power-law exponent must be positive");
    std::vector<double> out(s);
    for (std::size_t j = 0; j < s; ++j) out[j] = std::pow(static_cast<double>(j + 1), -c);
    return out;
  }
  auto values = parse_list<double>(spec, "weight");
  if (values.size() == 1) values.assign(s, values.front());
  if (values.size() != s) {
    throw ConfigError("weight list has " + std::to_string(values.size()) + " entries for dimension " +
                      std::to_string(s));
  }
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("weights must be positive");
  }
  return values;
}

/// n_min, n_min f, n_min f^2, ... rounded to integers, up to n_max.
inline std::vector<std::uint64_t> geometric_grid(std::uint64_t n_min, std::uint64_t n_max, double factor) {
  if (n_min < 1 || n_max < n_min) throw ConfigError("grid needs 1 <= n_min <= n_max");
  if (!(factor > 1.0)) throw ConfigError("grid factor must exceed 1");
  std::vector<std::uint64_t> out;
  for (double v = static_cast<double>(n_min); v <= static_cast<double>(n_max) * (1.0 + 1e-12); v *= factor) {
    const auto n = static_cast<std::uint64_t>(std::llround(v));
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  return out;
}

/// Bases from an explicit list, or the first s primes.
inline std::vector<std::uint32_t> resolve_bases(const ExperimentConfig& cfg) {
  if (cfg.bases) {
    if (cfg.s && *cfg.s != cfg.bases->size()) {
      throw ConfigError("--s " + std::to_string(*cfg.s) + " disagrees with " +
                        std::to_string(cfg.bases->size()) + " bases");
    }
    validate_bases(*cfg.bases);
    return *cfg.bases;
  }
  if (cfg.s) {
    if (*cfg.s == 0) throw ConfigError("dimension s must be at least 1");
    return first_primes(*cfg.s);
  }
  throw ConfigError("no bases given: use --bases or --s with --first-primes");
}

/// (seed, replicate) from "seed:replicate".
inline std::pair<std::uint64_t, std::uint64_t> parse_shift(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ConfigError("shift must be given as seed:replicate");
  return {parse_number<std::uint64_t>(spec.substr(0, colon), "shift seed"),
          parse_number<std::uint64_t>(spec.substr(colon + 1), "shift replicate")};
}

namespace detail {

inline std::string list_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return csv::format_double(v.get<double>());
  if (v.is_array()) {
    std::string out;
    for (const auto& e : v) {
      if (!out.empty()) out += ',';
      out += list_text(e);
    }
    return out;
  }
  throw ConfigError("expected a number, string or list");
}

template <class T>
std::vector<T> json_list(const nlohmann::json& v, const std::string& what) {
  if (v.is_array()) return v.get<std::vector<T>>();
  if (v.is_number()) return {v.get<T>()};
  if (v.is_string()) return parse_list<T>(v.get<std::string>(), what);
  throw ConfigError("expected a list for " + what);
}

template <class T>
void fill(std::optional<T>& field, const nlohmann::json& j, const char* key) {
  if (field || !j.contains(key)) return;
  field = j.at(key).get<T>();
}

}  // namespace detail

/// Fills fields that `flags` leaves unset from a JSON object; flags win.
inline ExperimentConfig merge_json(ExperimentConfig flags, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  static const std::vector<std::string> known{
      "bases", "s", "first_primes", "gamma", "alpha", "n", "n_min", "n_max", "factor", "start",
      "replicates", "seed", "g", "shift", "shift_out", "method", "space", "metric", "points", "point",
      "resolution", "out", "threads", "only"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown config key: " + key);
  }
  try {
    auto& c = flags;
    if (!c.bases && j.contains("bases")) c.bases = detail::json_list<std::uint32_t>(j["bases"], "base");
    if (!c.n && j.contains("n")) c.n = detail::json_list<std::uint64_t>(j["n"], "N");
    if (!c.g && j.contains("g")) c.g = detail::json_list<unsigned>(j["g"], "truncation");
    if (!c.point && j.contains("point")) c.point = detail::json_list<double>(j["point"], "coordinate");
    if (!c.gamma && j.contains("gamma")) c.gamma = detail::list_text(j["gamma"]);
    if (!c.alpha && j.contains("alpha")) c.alpha = detail::list_text(j["alpha"]);
    if (!c.only && j.contains("only")) {
      c.only = j["only"].is_string() ? csv::split(j["only"].get<std::string>())
                                     : j["only"].get<std::vector<std::string>>();
    }
    detail::fill(c.s, j, "s");
    detail::fill(c.first_primes, j, "first_primes");
    detail::fill(c.n_min, j, "n_min");
    detail::fill(c.n_max, j, "n_max");
    detail::fill(c.factor, j, "factor");
    detail::fill(c.start, j, "start");
    detail::fill(c.replicates, j, "replicates");
    detail::fill(c.seed, j, "seed");
    detail::fill(c.shift, j, "shift");
    detail::fill(c.shift_out, j, "shift_out");
    detail::fill(c.method, j, "method");
    detail::fill(c.space, j, "space");
    detail::fill(c.metric, j, "metric");
    detail::fill(c.points, j, "points");
    detail::fill(c.resolution, j, "resolution");
    detail::fill(c.out, j, "out");
    detail::fill(c.threads, j, "threads");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config file: ") + e.what());
  }
  return flags;
}

inline ExperimentConfig merge_json_file(ExperimentConfig flags, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  return merge_json(std::move(flags), j);
}

}  // namespace config
}  // namespace pqmc
