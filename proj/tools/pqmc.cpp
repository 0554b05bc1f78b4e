// pqmc: point generation, error and discrepancy computation, convergence
// studies and the verification suite for p-adically shifted Halton sequences.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pqmc/config.hpp"
#include "pqmc/csv.hpp"
#include "pqmc/discrepancy.hpp"
#include "pqmc/halton.hpp"
#include "pqmc/parallel.hpp"
#include "pqmc/point_set.hpp"
#include "pqmc/verify.hpp"
#include "pqmc/worst_case.hpp"

namespace {

using pqmc::ExperimentConfig;
using pqmc::ConfigError;
namespace csv = pqmc::csv;

enum ExitCode { kOk = 0, kVerifyFailed = 1, kUsage = 2, kNumerical = 3 };

constexpr std::uint64_t kExactLimit = std::uint64_t{1} << 15;

/// Raw flag text, converted into ExperimentConfig only for flags actually given.
struct Flags {
  std::string config, bases, gamma, alpha, n, g, shift, shift_out, method, space, metric, points, point, out,
      only;
  std::size_t s = 0, replicates = 0, resolution = 0;
  std::uint64_t n_min = 0, n_max = 0, start = 0, seed = 0;
  double factor = 0.0;
  unsigned threads = 0;
  bool first_primes = false;
};

struct Command {
  CLI::App* app = nullptr;
  Flags flags;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file; flags override its fields");
  app->add_option("--out", f.out, "output file (default: stdout)");
  app->add_option("--threads", f.threads, "worker cap (default: QMC_THREADS, else all cores)");
  app->add_option("--seed", f.seed, "random seed");
}

void add_sequence(CLI::App* app, Flags& f) {
  app->add_option("--bases", f.bases, "comma-separated distinct primes");
  app->add_option("--s", f.s, "dimension");
  app->add_flag("--first-primes", f.first_primes, "use the first s primes as bases");
}

void add_sizes(CLI::App* app, Flags& f) {
  app->add_option("--n", f.n, "comma-separated sample sizes");
  app->add_option("--n-min", f.n_min, "smallest N of a geometric grid");
  app->add_option("--n-max", f.n_max, "largest N of a geometric grid");
  app->add_option("--factor", f.factor, "ratio of the geometric grid (default 2)");
}

ExperimentConfig to_config(const CLI::App& app, const Flags& f) {
  ExperimentConfig c;
  auto given = [&](const char* name) {
    const auto* opt = app.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  using namespace pqmc::config;
  if (given("--bases")) c.bases = parse_list<std::uint32_t>(f.bases, "base");
  if (given("--s")) c.s = f.s;
  if (given("--first-primes")) c.first_primes = f.first_primes;
  if (given("--gamma")) c.gamma = f.gamma;
  if (given("--alpha")) c.alpha = f.alpha;
  if (given("--n")) c.n = parse_list<std::uint64_t>(f.n, "N");
  if (given("--n-min")) c.n_min = f.n_min;
  if (given("--n-max")) c.n_max = f.n_max;
  if (given("--factor")) c.factor = f.factor;
  if (given("--start")) c.start = f.start;
  if (given("--replicates")) c.replicates = f.replicates;
  if (given("--seed")) c.seed = f.seed;
  if (given("--g")) c.g = parse_list<unsigned>(f.g, "truncation");
  if (given("--shift")) c.shift = f.shift;
  if (given("--shift-out")) c.shift_out = f.shift_out;
  if (given("--method")) c.method = f.method;
  if (given("--space")) c.space = f.space;
  if (given("--metric")) c.metric = f.metric;
  if (given("--points")) c.points = f.points;
  if (given("--point")) c.point = parse_list<double>(f.point, "coordinate");
  if (given("--resolution")) c.resolution = f.resolution;
  if (given("--out")) c.out = f.out;
  if (given("--threads")) c.threads = f.threads;
  if (given("--only")) c.only = csv::split(f.only);
  if (given("--config")) c = merge_json_file(std::move(c), f.config);
  return c;
}

/// stdout, or the file named by --out.
class Output {
 public:
  explicit Output(const std::optional<std::string>& path) {
    if (path && *path != "-") {
      file_ = std::make_unique<std::ofstream>(*path, std::ios::binary);
      if (!*file_) throw ConfigError("cannot write " + *path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

unsigned threads_of(const ExperimentConfig& c) { return pqmc::resolve_threads(c.threads); }

std::vector<std::uint64_t> sizes_of(const ExperimentConfig& c, bool allow_grid) {
  if (c.n) {
    if (c.n->empty()) throw ConfigError("empty N list");
    for (auto n : *c.n) {
      if (n == 0) throw ConfigError("N must be positive");
    }
    return *c.n;
  }
  if (allow_grid && (c.n_min || c.n_max)) {
    return pqmc::config::geometric_grid(c.n_min.value_or(16), c.n_max.value_or(4096), c.factor.value_or(2.0));
  }
  throw ConfigError("no sample size given: use --n");
}

std::vector<double> weights_of(const ExperimentConfig& c, std::size_t s) {
  return pqmc::config::parse_weights(c.gamma.value_or("1"), s);
}

std::vector<unsigned> truncation_of(const ExperimentConfig& c, std::span<const std::uint32_t> bases,
                                    std::uint64_t n) {
  if (!c.g) return pqmc::default_truncation(bases, n);
  auto g = *c.g;
  if (g.size() == 1) g.assign(bases.size(), g.front());
  if (g.size() != bases.size()) throw ConfigError("--g needs one entry or one per coordinate");
  return g;
}

pqmc::PointSet points_of(const ExperimentConfig& c) {
  if (c.point) {
    pqmc::PointSet set(c.point->size());
    set.push_back(*c.point);
    return set;
  }
  std::ifstream in(*c.points);
  if (!in) throw ConfigError("cannot open points file " + *c.points);
  return pqmc::read_points_csv(in);
}

pqmc::ErrorReport new_report(const std::string& space, std::size_t s, std::uint64_t n) {
  pqmc::ErrorReport r;
  r.space = space;
  r.s = s;
  r.n = n;
  return r;
}

// ---------------------------------------------------------------------------

int cmd_gen(const ExperimentConfig& c) {
  const auto bases = pqmc::config::resolve_bases(c);
  const auto sizes = sizes_of(c, false);
  if (sizes.size() != 1) throw ConfigError("gen takes a single --n");
  pqmc::HaltonSpec spec{bases, c.start.value_or(0), std::nullopt};
  if (c.shift) {
    const auto [seed, replicate] = pqmc::config::parse_shift(*c.shift);
    spec.shift = pqmc::sample_shift(bases, pqmc::shared_precision(bases), seed, replicate);
  }
  const auto points = pqmc::halton_block(spec, sizes.front());

  std::optional<std::string> sidecar = c.shift_out;
  if (spec.shift && !sidecar) {
    if (!c.out || *c.out == "-") throw ConfigError("--shift writing to stdout needs --shift-out for the digits");
    sidecar = *c.out + ".shift.csv";
  }
  Output out(c.out);
  pqmc::write_points_csv(out.stream(), points, spec.start_index);
  if (spec.shift) {
    std::ofstream side(*sidecar, std::ios::binary);
    if (!side) throw ConfigError("cannot write " + *sidecar);
    csv::write_row(side, {"coordinate", "base", "seed", "replicate", "precision", "digits"});
    for (std::size_t j = 0; j < bases.size(); ++j) {
      const auto& z = spec.shift->sigma[j];
      std::string digits;
      for (std::size_t r = 0; r < z.precision(); ++r) {
        if (r != 0) digits += ' ';
        digits += std::to_string(z.digit(r));
      }
      csv::write_row(side, {std::to_string(j + 1), std::to_string(bases[j]), std::to_string(spec.shift->seed),
                            std::to_string(spec.shift->replicate), std::to_string(z.precision()), digits});
    }
  }
  return kOk;
}

int cmd_error(const ExperimentConfig& c) {
  const std::string space_name = c.space.value_or("sobolev");
  const std::string method = c.method.value_or("exact");
  if (space_name != "sobolev" && space_name != "korobov") throw ConfigError("--space must be sobolev or korobov");
  if (method != "exact" && method != "series") throw ConfigError("--method must be exact or series");
  const unsigned threads = threads_of(c);
  const std::uint64_t seed = c.seed.value_or(0);
  std::vector<pqmc::ErrorReport> rows;

  if (c.points || c.point) {
    if (space_name != "sobolev" || method != "exact") {
      throw ConfigError("explicit points support only --space sobolev --method exact");
    }
    const auto points = points_of(c);
    const auto gamma = weights_of(c, points.dimension());
    auto r = new_report(space_name, points.dimension(), points.size());
    r.e_sq = pqmc::wce_sq_sobolev(points, gamma, threads);
    rows.push_back(r);
  } else {
    const auto bases = pqmc::config::resolve_bases(c);
    const auto gamma = weights_of(c, bases.size());
    const auto sizes = sizes_of(c, true);
    if (space_name == "korobov") {
      if (method == "exact") throw ConfigError("the Korobov-type space has no closed kernel; use --method series");
      auto alpha = pqmc::config::parse_weights(c.alpha.value_or("2"), bases.size());
      const auto space = pqmc::korobov_space(bases, gamma, alpha);
      for (auto n : sizes) {
        auto r = new_report(space_name, bases.size(), n);
        const auto g = truncation_of(c, bases, n);
        try {
          r.series = pqmc::error_series(space, n, g, threads);
        } catch (const pqmc::ResourceError&) {
          if (c.g) throw;
          std::cerr << "note: N=" << n << " index box too large, using the lag closed form\n";
          r.series = pqmc::SeriesValue{pqmc::error_lag_exact(space, n), 0.0};
        }
        if (n >= 2) r.theory_bound = pqmc::theory_bound_korobov(bases, gamma, n);
        rows.push_back(r);
      }
    } else {
      const auto space = pqmc::sobolev_space(bases, gamma);
      const std::size_t m = c.replicates.value_or(16);
      for (auto n : sizes) {
        auto r = new_report(space_name, bases.size(), n);
        if (method == "exact") {
          if (n > kExactLimit) {
            throw ConfigError("exact mode is limited to N <= 32768 (O(N^2) kernel sums); use --method series");
          }
          if (m >= 2) {
            const auto est = pqmc::rms_wce_monte_carlo(space, n, m, seed, threads);
            r.replicates = m;
            r.e_sq = est.mean;
            r.e_sq_stderr = est.stderr_;
            r.seed = seed;
          } else {
            // M = 0 or 1: the unshifted sequence
            const auto points = pqmc::halton_block(pqmc::HaltonSpec{bases, c.start.value_or(0), std::nullopt}, n);
            r.e_sq = pqmc::wce_sq(space, points, threads);
          }
        } else {
          const auto g = truncation_of(c, bases, n);
          try {
            r.series = pqmc::error_series(space, n, g, threads);
          } catch (const pqmc::ResourceError&) {
            if (c.g) throw;
            std::cerr << "note: N=" << n << " index box too large, using the lag closed form\n";
            r.series = pqmc::SeriesValue{pqmc::error_lag_exact(space, n), 0.0};
          }
        }
        if (n >= 2) r.theory_bound = pqmc::theory_bound_sobolev(bases, gamma, n);
        rows.push_back(r);
      }
    }
  }
  Output out(c.out);
  csv::write_row(out.stream(), pqmc::ErrorReport::csv_header());
  for (const auto& r : rows) csv::write_row(out.stream(), r.csv_row());
  return kOk;
}

int cmd_discrepancy(const ExperimentConfig& c) {
  const std::string method = c.method.value_or("closed");
  if (method != "closed" && method != "subsets" && method != "quadrature") {
    throw ConfigError("--method must be closed, subsets or quadrature");
  }
  const unsigned threads = threads_of(c);
  Output out(c.out);
  csv::write_row(out.stream(), {"s", "N", "M", "weighted", "method", "l2_sq_mean", "l2_sq_stderr", "seed"});

  auto evaluate = [&](const pqmc::PointSet& points) {
    const bool weighted = c.gamma.has_value();
    const auto gamma = weighted ? weights_of(c, points.dimension()) : std::vector<double>{};
    if (method == "quadrature") return pqmc::l2_sq_quadrature(points, gamma, c.resolution.value_or(2048)).l2_sq;
    if (!weighted) {
      if (method == "subsets") throw ConfigError("--method subsets needs --gamma");
      return pqmc::unweighted_l2_sq(points, threads);
    }
    return method == "subsets" ? pqmc::weighted_l2_sq_subsets(points, gamma)
                               : pqmc::weighted_l2_sq(points, gamma, threads);
  };
  const std::string weighted = c.gamma ? "1" : "0";

  if (c.points || c.point) {
    const auto points = points_of(c);
    csv::write_row(out.stream(), {std::to_string(points.dimension()), std::to_string(points.size()), "", weighted,
                                  method, csv::format_double(evaluate(points)), "", ""});
    return kOk;
  }
  const auto bases = pqmc::config::resolve_bases(c);
  const std::size_t m = c.replicates.value_or(0);
  const std::uint64_t seed = c.seed.value_or(0);
  for (auto n : sizes_of(c, true)) {
    if (m >= 2) {
      std::vector<double> values(m);
      pqmc::parallel_for(m, threads, [&](std::size_t r) {
        pqmc::HaltonSpec spec{bases, c.start.value_or(0),
                              pqmc::sample_shift(bases, pqmc::shared_precision(bases), seed, r)};
        values[r] = evaluate(pqmc::halton_block(spec, n));
      });
      const auto st = pqmc::mean_stderr(values);
      csv::write_row(out.stream(), {std::to_string(bases.size()), std::to_string(n), std::to_string(m), weighted,
                                    method, csv::format_double(st.mean), csv::format_double(st.stderr_),
                                    std::to_string(seed)});
    } else {
      pqmc::HaltonSpec spec{bases, c.start.value_or(0), std::nullopt};
      std::string seed_field;
      if (c.shift) {
        const auto [s_seed, rep] = pqmc::config::parse_shift(*c.shift);
        spec.shift = pqmc::sample_shift(bases, pqmc::shared_precision(bases), s_seed, rep);
        seed_field = std::to_string(s_seed);
      }
      csv::write_row(out.stream(), {std::to_string(bases.size()), std::to_string(n), "", weighted, method,
                                    csv::format_double(evaluate(pqmc::halton_block(spec, n))), "", seed_field});
    }
  }
  return kOk;
}

int cmd_convergence(const ExperimentConfig& c) {
  const std::string metric = c.metric.value_or("l2");
  if (metric != "l2" && metric != "wce") throw ConfigError("--metric must be l2 or wce");
  const auto bases = pqmc::config::resolve_bases(c);
  std::vector<std::uint64_t> grid;
  if (c.n) {
    grid = sizes_of(c, false);
  } else {
    grid = pqmc::config::geometric_grid(c.n_min.value_or(16), c.n_max.value_or(4096), c.factor.value_or(2.0));
  }
  if (grid.size() < 4) {
    throw ConfigError("refusing to fit a slope to " + std::to_string(grid.size()) + " points; need at least 4");
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] <= grid[i - 1]) throw ConfigError("N grid must be strictly increasing");
  }
  const unsigned threads = threads_of(c);
  const std::size_t m = c.replicates.value_or(32);
  const std::uint64_t seed = c.seed.value_or(0);
  const double half_s = static_cast<double>(bases.size()) / 2.0;

  std::vector<pqmc::L2Record> records;
  if (metric == "l2") {
    if (c.method && *c.method != "exact") throw ConfigError("--metric l2 supports only --method exact");
    if (grid.back() > kExactLimit) throw ConfigError("N above 32768 is too large for O(N^2) discrepancy sums");
    records = pqmc::rms_l2_experiment(bases, grid, m, seed, threads).records;
  } else {
    const auto space = pqmc::sobolev_space(bases, weights_of(c, bases.size()));
    const std::string method = c.method.value_or("exact");
    if (method == "exact") {
      if (grid.back() > kExactLimit) {
        throw ConfigError("exact mode is limited to N <= 32768 (O(N^2) kernel sums); use --method series");
      }
      for (const auto& e : pqmc::rms_wce_monte_carlo(space, grid, m, seed, threads)) {
        records.push_back({e.n, e.mean, e.stderr_, std::sqrt(e.mean), 0.0, e.min, e.argmin});
      }
    } else if (method == "series") {
      const auto exact = pqmc::error_lag_exact(space, grid);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        records.push_back({grid[i], exact[i], 0.0, std::sqrt(exact[i]), 0.0, exact[i], 0});
      }
    } else {
      throw ConfigError("--method must be exact or series");
    }
    for (auto& r : records) {
      const double log_n = std::log(static_cast<double>(r.n));
      r.ratio = r.n >= 2 ? static_cast<double>(r.n) * r.rms / std::pow(log_n, half_s) : 0.0;
    }
  }
  std::vector<double> ns, rms;
  for (const auto& r : records) {
    ns.push_back(static_cast<double>(r.n));
    rms.push_back(r.rms);
  }
  const auto fit = pqmc::fit_loglog(ns, rms);

  Output out(c.out);
  csv::write_row(out.stream(), {"N", "mean", "stderr", "rms", "ratio"});
  for (const auto& r : records) {
    csv::write_row(out.stream(), {std::to_string(r.n), csv::format_double(r.mean), csv::format_double(r.stderr_),
                                  csv::format_double(r.rms), csv::format_double(r.ratio)});
  }
  csv::write_row(out.stream(), {"slope", csv::format_double(fit.slope), "r2", csv::format_double(fit.r2)});
  return kOk;
}

int cmd_verify(const ExperimentConfig& c) {
  const auto only = c.only.value_or(std::vector<std::string>{});
  const auto results = pqmc::verify::run_suite(c.seed.value_or(0), only, threads_of(c));
  Output out(c.out);
  pqmc::verify::write_suite_csv(out.stream(), results);
  const bool all = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
  return all ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-adically shifted Halton quasi-Monte Carlo"};
  app.require_subcommand(1);

  Command gen, error, disc, conv, verify;
  gen.app = app.add_subcommand("gen", "write Halton points as CSV");
  error.app = app.add_subcommand("error", "squared worst-case errors, RMS estimates and bounds");
  disc.app = app.add_subcommand("discrepancy", "weighted or unweighted L2-discrepancy");
  conv.app = app.add_subcommand("convergence", "RMS error over a geometric N grid with a log-log fit");
  verify.app = app.add_subcommand("verify", "run the verification suite");

  for (auto* cmd : {&gen, &error, &disc, &conv, &verify}) add_common(cmd->app, cmd->flags);
  for (auto* cmd : {&gen, &error, &disc, &conv}) add_sequence(cmd->app, cmd->flags);
  add_sizes(error.app, error.flags);
  add_sizes(disc.app, disc.flags);
  add_sizes(conv.app, conv.flags);
  gen.app->add_option("--n", gen.flags.n, "number of points");
  for (auto* cmd : {&gen, &error, &disc}) cmd->app->add_option("--start", cmd->flags.start, "first index");
  for (auto* cmd : {&gen, &disc}) {
    cmd->app->add_option("--shift", cmd->flags.shift, "p-adic shift as seed:replicate");
  }
  gen.app->add_option("--shift-out", gen.flags.shift_out, "sidecar CSV for the shift digits");
  for (auto* cmd : {&error, &disc, &conv}) {
    cmd->app->add_option("--gamma", cmd->flags.gamma, "weights: constant, pow:c or a list");
    cmd->app->add_option("--replicates", cmd->flags.replicates, "number of random shifts M");
    cmd->app->add_option("--method", cmd->flags.method, "evaluation method");
  }
  for (auto* cmd : {&error, &disc}) {
    cmd->app->add_option("--points", cmd->flags.points, "CSV of points instead of a Halton sequence");
    cmd->app->add_option("--point", cmd->flags.point, "a single point, comma-separated");
  }
  error.app->add_option("--space", error.flags.space, "sobolev or korobov");
  error.app->add_option("--alpha", error.flags.alpha, "Korobov-type smoothness, constant or list");
  error.app->add_option("--g", error.flags.g, "truncation digits, one or per coordinate");
  disc.app->add_option("--resolution", disc.flags.resolution, "quadrature grid cells per axis");
  conv.app->add_option("--metric", conv.flags.metric, "l2 or wce");
  verify.app->add_option("--only", verify.flags.only, "comma-separated check names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    for (auto* cmd : {&gen, &error, &disc, &conv, &verify}) {
      if (!cmd->app->parsed()) continue;
      const auto cfg = to_config(*cmd->app, cmd->flags);
      if (cmd == &gen) return cmd_gen(cfg);
      if (cmd == &error) return cmd_error(cfg);
      if (cmd == &disc) return cmd_discrepancy(cfg);
      if (cmd == &conv) return cmd_convergence(cfg);
      return cmd_verify(cfg);
    }
  } catch (const pqmc::NumericalConsistencyError& e) {
    std::cerr << "numerical consistency error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
