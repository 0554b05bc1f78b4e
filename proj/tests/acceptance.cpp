// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pqmc/discrepancy.hpp"
#include "pqmc/verify.hpp"
#include "pqmc/worst_case.hpp"

namespace {

namespace v = pqmc::verify;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

unsigned threads() { return pqmc::resolve_threads(); }

std::vector<double> power_weights(std::size_t s, double c) {
  std::vector<double> g(s);
  for (std::size_t j = 0; j < s; ++j) g[j] = std::pow(static_cast<double>(j + 1), -c);
  return g;
}

std::vector<std::uint64_t> powers_of_two(unsigned lo, unsigned hi) {
  std::vector<std::uint64_t> out;
  for (unsigned e = lo; e <= hi; ++e) out.push_back(std::uint64_t{1} << e);
  return out;
}

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  const std::string cmd = std::string(PQMC_CLI_PATH) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

Outcome criterion1() {
  pqmc::CounterRng rng(pqmc::derive_key({2024, 1}));
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t s = 1 + rng.uniform_below(3);
    const std::size_t n = 1 + rng.uniform_below(64);
    std::vector<double> gamma(s);
    for (auto& g : gamma) g = 2.0 - 2.0 * rng.uniform01();
    pqmc::PointSet points(s);
    std::vector<double> x(s);
    for (std::size_t m = 0; m < n; ++m) {
      for (auto& c : x) c = rng.uniform01();
      points.push_back(x);
    }
    worst = std::max(worst, std::abs(pqmc::wce_sq_sobolev(points, gamma) - pqmc::weighted_l2_sq_subsets(points, gamma)));
  }
  return {worst <= 1e-10, "max |wce^2 - L2^2| = " + fmt(worst) + " (tol 1e-10)"};
}

Outcome criterion2() {
  double worst = 0.0;
  for (double gamma : {0.1, 0.5, 1.0, 1.7, 2.0}) {
    const double g[] = {gamma};
    for (auto [x, expected] : {std::pair{1.0, gamma / 3.0}, std::pair{0.5, gamma / 12.0}}) {
      pqmc::PointSet points(1);
      const double xs[] = {x};
      points.push_back(xs);
      worst = std::max(worst, std::abs(pqmc::wce_sq_sobolev(points, g) - expected));
    }
  }
  return {worst <= 1e-14, "max error = " + fmt(worst) + " (tol 1e-14)"};
}

Outcome criterion3() {
  double worst = 0.0, worst_limit = 0.0;
  for (std::uint32_t p : {2u, 3u, 5u, 7u}) {
    for (double gamma : {0.5, 1.0, 2.0}) {
      for (unsigned g = 0; g <= 12; ++g) {
        const double closed = pqmc::r_sum_box(p, gamma, g);
        worst = std::max(worst, std::abs(v::r_sum_direct(p, gamma, g) - closed) / closed);
      }
      const double total = pqmc::r_sum_total(gamma);
      worst_limit = std::max(worst_limit, std::abs(pqmc::r_sum_box(p, gamma, 2000) - total) / total);
      worst_limit = std::max(worst_limit, std::abs(1.0 + gamma / 2.0 - total));
    }
  }
  return {worst <= 1e-13 && worst_limit <= 1e-13,
          "max rel diff = " + fmt(worst) + ", limit diff = " + fmt(worst_limit) + " (tol 1e-13)"};
}

Outcome criterion4() {
  double diff = 0.0, coef = 0.0;
  for (std::uint32_t p : {2u, 3u, 5u}) {
    for (std::uint64_t k = 1; k < std::uint64_t{p} * p * p; ++k) {
      const auto c = v::check_tau(p, k);
      diff = std::max(diff, c.diff);
      for (double gamma : {0.5, 1.0, 2.0}) {
        coef = std::max(coef, std::abs(-gamma / 2.0 * c.closed_form - pqmc::r_sobolev(p, gamma, k)));
      }
    }
  }
  return {diff < 1e-12 && coef < 1e-12,
          "max tau diff = " + fmt(diff) + ", max |-(g/2)tau - r| = " + fmt(coef) + " (tol 1e-12)"};
}

Outcome criterion5() {
  pqmc::CounterRng rng(pqmc::derive_key({2024, 5}));
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 20; ++i) pairs.emplace_back(rng.uniform01(), rng.uniform01());
  const auto two = v::check_shift_invariant_kernel(2, 1.0, pairs, 12, std::uint64_t{1} << 16);
  const auto three = v::check_shift_invariant_kernel(3, 1.0, pairs, 8, 59049);
  const double excess = std::max(two.max_excess, three.max_excess);
  return {excess <= 1e-3, "max (|quad - series| - tail) = " + fmt(excess) + " (tol 1e-3); max diff p=2 " +
                              fmt(two.max_diff) + ", p=3 " + fmt(three.max_diff)};
}

Outcome criterion6() {
  const std::vector<std::uint32_t> b2{2, 3}, b3{2, 3, 5};
  const double worst = std::max(v::check_char_sum_bound(b2, 10000, 6), v::check_char_sum_bound(b3, 10000, 6));
  return {worst <= 1.0 + 1e-9, "max |S_N| |sin(pi theta)| = " + fmt(worst) + " (tol 1 + 1e-9)"};
}

Outcome criterion7() {
  bool ok = true;
  double worst = 0.0;
  for (std::size_t s : {1u, 2u}) {
    const auto space = pqmc::sobolev_space(pqmc::first_primes(s), std::vector<double>(s, 1.0));
    const std::vector<std::uint64_t> grid{8, 16, 32, 64};
    const auto mc = pqmc::rms_wce_monte_carlo(space, grid, 2000, 77, threads());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto g = pqmc::default_truncation(space.bases, grid[i]);
      const auto series = pqmc::error_series(space, grid[i], g, threads());
      const double lo = series.value - 3.0 * mc[i].stderr_;
      const double hi = series.value + series.tail + 3.0 * mc[i].stderr_;
      const double outside = std::max({0.0, lo - mc[i].mean, mc[i].mean - hi}) / mc[i].stderr_;
      worst = std::max(worst, (mc[i].mean - series.value) / mc[i].stderr_);
      ok = ok && outside == 0.0;
    }
  }
  return {ok, "MC means inside [series - 3SE, series + tail + 3SE]; max (mean - series)/SE = " + fmt(worst)};
}

Outcome criterion8() {
  const auto grid = powers_of_two(2, 12);
  double worst_ratio = 0.0;
  bool bounded = true;
  for (std::size_t s = 1; s <= 3; ++s) {
    const auto bases = pqmc::first_primes(s);
    const auto gamma = power_weights(s, 4.0);
    const auto space = pqmc::sobolev_space(bases, gamma);
    const auto exact = pqmc::error_lag_exact(space, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double bound = pqmc::theory_bound_sobolev(bases, gamma, grid[i]);
      worst_ratio = std::max(worst_ratio, exact[i] / bound);
      bounded = bounded && exact[i] <= bound;
    }
  }
  const auto space1 = pqmc::sobolev_space({2}, {1.0});
  const auto exact1 = pqmc::error_lag_exact(space1, grid);
  std::vector<double> ns, rms;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ns.push_back(static_cast<double>(grid[i]));
    rms.push_back(std::sqrt(exact1[i]));
  }
  const auto fit = pqmc::fit_loglog(ns, rms);
  const bool slope_ok = fit.slope >= -1.15 && fit.slope <= -0.80 && fit.r2 >= 0.98;
  return {bounded && slope_ok, "max value/bound = " + fmt(worst_ratio) + "; s=1 slope " + fmt(fit.slope) +
                                   " r2 " + fmt(fit.r2) + " (slope in [-1.15,-0.80], r2 >= 0.98)"};
}

Outcome criterion9() {
  const auto grid = powers_of_two(4, 12);
  bool ok = true;
  std::string detail;
  for (std::size_t s : {1u, 2u}) {
    const auto exp = pqmc::rms_l2_experiment(pqmc::first_primes(s), grid, 64, 99, threads());
    double lo = INFINITY, hi = 0.0;
    for (const auto& r : exp.records) {
      lo = std::min(lo, r.ratio);
      hi = std::max(hi, r.ratio);
    }
    ok = ok && hi / lo < 10.0;
    detail += "s=" + std::to_string(s) + " ratio max/min " + fmt(hi / lo) + "; ";
    if (s == 1) {
      ok = ok && exp.fit && exp.fit->slope >= -1.15 && exp.fit->slope <= -0.85;
      detail += "s=1 slope " + fmt(exp.fit ? exp.fit->slope : NAN) + " (in [-1.15,-0.85]); ";
    }
  }
  return {ok, detail + "ratio tol 10"};
}

Outcome criterion10() {
  const auto grid = powers_of_two(2, 12);
  double worst = 0.0, worst_sharp = 0.0;
  bool ok = true;
  for (std::size_t s = 1; s <= 3; ++s) {
    const auto bases = pqmc::first_primes(s);
    const auto gamma = power_weights(s, 4.0);
    for (double a : {2.0, 3.0}) {
      const std::vector<double> alpha(s, a);
      const auto space = pqmc::korobov_space(bases, gamma, alpha);
      const auto exact = pqmc::error_lag_exact(space, grid);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double bound = pqmc::theory_bound_korobov(bases, gamma, grid[i]);
        worst = std::max(worst, exact[i] / bound);
        ok = ok && exact[i] <= bound;
        if (a > 2.0) {
          const auto sharp = pqmc::theory_bound_korobov_sharp(bases, gamma, alpha, grid[i]);
          ok = ok && sharp && exact[i] <= *sharp;
          if (sharp) worst_sharp = std::max(worst_sharp, exact[i] / *sharp);
        }
      }
    }
  }
  return {ok, "max value/bound = " + fmt(worst) + "; alpha=3 max value/sharp bound = " + fmt(worst_sharp)};
}

Outcome criterion11() {
  double worst = 0.0;
  for (auto [p, g] : {std::pair{2u, 4u}, std::pair{3u, 3u}, std::pair{5u, 2u}}) {
    const auto cells = static_cast<std::uint64_t>(std::pow(p, g));
    worst = std::max(worst, pqmc::gram_check(p, g, cells));
  }
  return {worst < 1e-12, "max |G - I| = " + fmt(worst) + " (tol 1e-12)"};
}

Outcome criterion12() {
  double worst = 0.0;
  for (std::uint32_t p = 2; p <= 101; ++p) {
    if (pqmc::is_prime(p)) worst = std::max(worst, v::check_sin_sum(p).diff);
  }
  return {worst <= 1e-8, "max |sum - (p^2-1)/3| = " + fmt(worst) + " (tol 1e-8)"};
}

Outcome criterion13() {
  const auto one = run_cli("verify --seed 13 --threads 1");
  const auto again = run_cli("verify --seed 13 --threads 1");
  const auto many = run_cli("verify --seed 13 --threads 4");
  const bool same = one.out == again.out && one.out == many.out && !one.out.empty();
  return {one.code == 0 && many.code == 0 && same,
          "exit codes " + std::to_string(one.code) + "/" + std::to_string(many.code) +
              (same ? ", CSV bytes identical across runs and thread counts" : ", CSV bytes differ")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    double seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, 10, criterion1},  {2, 1e9, criterion2},  {3, 5, criterion3},    {4, 30, criterion4},  {5, 60, criterion5},
      {6, 30, criterion6},  {7, 300, criterion7},  {8, 300, criterion8},  {9, 300, criterion9}, {10, 120, criterion10},
      {11, 1e9, criterion11}, {12, 1e9, criterion12}, {13, 1e9, criterion13}};

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = elapsed <= c.seconds;
    const bool passed = out.passed && in_time;
    failures += passed ? 0 : 1;
    std::ostringstream line;
    line << "criterion " << c.id << ": " << (passed ? "PASS" : "FAIL") << "  " << out.detail << "  [" << fmt(elapsed)
         << " s";
    if (c.seconds < 1e9) line << ", limit " << c.seconds << " s";
    if (!in_time) line << ", too slow";
    line << "]";
    std::cout << line.str() << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
