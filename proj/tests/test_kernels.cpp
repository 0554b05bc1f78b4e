#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "pqmc/halton.hpp"
#include "pqmc/kernels.hpp"
#include "pqmc/stats.hpp"

namespace {

using pqmc::AnchorKind;
using pqmc::WeightedSpace;

WeightedSpace anchored_at(std::vector<std::uint32_t> bases, std::vector<double> gamma, std::vector<double> w) {
  WeightedSpace space{std::move(bases), std::move(gamma), std::nullopt, {AnchorKind::w, std::move(w)}};
  space.validate();
  return space;
}

WeightedSpace unanchored(std::vector<std::uint32_t> bases, std::vector<double> gamma) {
  WeightedSpace space{std::move(bases), std::move(gamma), std::nullopt, {AnchorKind::unanchored, {}}};
  space.validate();
  return space;
}

TEST(SobolevKernel, Examples) {
  const auto one = pqmc::sobolev_space({2, 3}, {0.7, 1.3});
  const std::vector<double> ones{1.0, 1.0};
  EXPECT_EQ(pqmc::sobolev_kernel(one, ones, ones), 1.0);
  const auto s1 = pqmc::sobolev_space({2}, {1.0});
  const std::vector<double> zero{0.0};
  EXPECT_EQ(pqmc::sobolev_kernel(s1, zero, zero), 2.0);
  const auto s2 = pqmc::sobolev_space({2, 3}, {1.0, 2.0});
  const std::vector<double> x{0.0, 0.5}, y{0.5, 0.5};
  EXPECT_DOUBLE_EQ(pqmc::sobolev_kernel(s2, x, y), 3.0);
  const std::vector<double> short_x{0.5};
  EXPECT_THROW(pqmc::sobolev_kernel(s2, short_x, y), pqmc::DimensionMismatch);
}

TEST(WeightedSpace, Validation) {
  EXPECT_THROW(pqmc::sobolev_space({2, 3}, {1.0}), pqmc::DimensionMismatch);
  EXPECT_THROW(pqmc::sobolev_space({2}, {-1.0}), pqmc::DomainError);
  EXPECT_THROW(pqmc::sobolev_space({4}, {1.0}), pqmc::InvalidBase);
  EXPECT_THROW(pqmc::korobov_space({2}, {1.0}, {1.0}), pqmc::DomainError);
  EXPECT_THROW(anchored_at({2}, {1.0}, {1.5}), pqmc::DomainError);
}

TEST(SobolevCoefficients, Examples) {
  for (double gamma : {0.3, 1.0, 2.0}) {
    for (std::uint32_t p : {2u, 3u, 5u}) EXPECT_DOUBLE_EQ(pqmc::r_sobolev(p, gamma, 0), 1.0 + gamma / 3.0);
    EXPECT_DOUBLE_EQ(pqmc::r_sobolev(2, gamma, 1), gamma / 12.0);
  }
  EXPECT_DOUBLE_EQ(pqmc::r_sum_box(2, 1.0, 1), 17.0 / 12.0);
  EXPECT_DOUBLE_EQ(pqmc::r_sobolev(2, 1.0, 0) + pqmc::r_sobolev(2, 1.0, 1), 17.0 / 12.0);
  double direct = 0.0;
  for (std::uint64_t k = 0; k < 9; ++k) direct += pqmc::r_sobolev(3, 2.0, k);
  EXPECT_NEAR(pqmc::r_sum_box(3, 2.0, 2), direct, 1e-14);
  EXPECT_DOUBLE_EQ(pqmc::r_sum_total(0.8), 1.4);
}

TEST(SobolevCoefficients, PositiveAndLeadingDigitOnly) {
  for (std::uint32_t p : {2u, 3u, 5u, 7u}) {
    const std::uint64_t limit = p == 2 ? 4096 : (p == 3 ? 531441 : 100000);
    for (std::uint64_t k = 0; k < limit; ++k) ASSERT_GT(pqmc::r_sobolev(p, 1.0, k), 0.0);
    // k and k' with equal length and leading digit, k < p^6
    std::uint64_t p6 = 1;
    for (int i = 0; i < 6; ++i) p6 *= p;
    for (std::uint64_t k = 1; k < p6; ++k) {
      const auto info = pqmc::digit_info(p, k);
      const std::uint64_t base = static_cast<std::uint64_t>(info.modulus) / p * info.leading;
      ASSERT_EQ(pqmc::r_sobolev(p, 1.5, k), pqmc::r_sobolev(p, 1.5, base));
    }
  }
}

TEST(SobolevCoefficients, BoxSumsAndTails) {
  for (std::uint32_t p : {2u, 3u, 5u, 7u}) {
    for (double gamma : {0.5, 1.0, 2.0}) {
      pqmc::CompensatedSum direct;
      std::uint64_t extent = 1;
      for (unsigned g = 0; g <= 6; ++g) {
        for (std::uint64_t k = g == 0 ? 0 : extent / p; k < extent; ++k) direct.add(pqmc::r_sobolev(p, gamma, k));
        const double closed = pqmc::r_sum_box(p, gamma, g);
        EXPECT_NEAR(direct.value(), closed, 1e-13 * closed);
        EXPECT_NEAR(closed + pqmc::r_tail(p, gamma, g), pqmc::r_sum_total(gamma), 1e-14);
        extent *= p;
      }
      EXPECT_NEAR(pqmc::r_sum_box(p, gamma, 200), pqmc::r_sum_total(gamma), 1e-14);
    }
  }
}

TEST(SobolevCoefficients, MultiDimensionalIdentities) {
  const std::vector<std::uint32_t> bases{2, 3, 5, 7, 11};
  const std::vector<double> gamma{1.0, 0.5, 0.25, 0.125, 0.0625};
  const std::vector<unsigned> g{3, 2, 2, 1, 1};
  const auto space = pqmc::sobolev_space(bases, gamma);
  double total = 1.0;
  for (double v : gamma) total *= 1.0 + v / 2.0;
  EXPECT_NEAR(space.product_total(), total, 1e-13 * total);
  const double box = pqmc::r_sum_box_multi(bases, gamma, g);
  EXPECT_NEAR(space.tail_outside_box(g), total - box, 1e-13 * total);
  EXPECT_GE(space.tail_outside_box(g), 0.0);
}

TEST(AnchoredCoefficients, Examples) {
  EXPECT_DOUBLE_EQ(pqmc::anchor_w_r0(1.5, 0.0), 1.5);
  EXPECT_DOUBLE_EQ(pqmc::anchor_w_r0(1.5, 1.0), 1.5);
  EXPECT_DOUBLE_EQ(pqmc::anchor_w_r0(1.2, 0.5), 1.1);
  EXPECT_THROW(pqmc::anchor_w_r0(1.0, -0.1), pqmc::DomainError);
}

TEST(KorobovCoefficients, Examples) {
  EXPECT_EQ(pqmc::r_korobov(3, 2.0, 0.4, 0), 1.0);
  EXPECT_EQ(pqmc::r_korobov(2, 2.0, 1.0, 1), 1.0);
  EXPECT_EQ(pqmc::r_korobov(2, 2.0, 1.0, 2), 0.25);
  EXPECT_THROW(pqmc::r_korobov(2, 1.0, 1.0, 2), pqmc::DomainError);
}

TEST(KorobovCoefficients, SumsAgainstDirectSummation) {
  for (std::uint32_t p : {2u, 3u, 5u}) {
    for (double alpha : {1.5, 2.0, 3.0}) {
      for (double gamma : {0.5, 1.0}) {
        pqmc::CompensatedSum direct;
        std::uint64_t extent = 1;
        double previous = INFINITY;
        for (unsigned g = 0; g <= 7; ++g) {
          for (std::uint64_t k = g == 0 ? 0 : extent / p; k < extent; ++k) direct.add(pqmc::r_korobov(p, alpha, gamma, k));
          if (g >= 1) {
            const double r = pqmc::r_korobov(p, alpha, gamma, extent / p);
            EXPECT_LE(r, previous);
            previous = r;
          }
          const double closed = pqmc::korobov_sum_box(p, alpha, gamma, g);
          EXPECT_NEAR(direct.value(), closed, 1e-13 * closed);
          EXPECT_NEAR(closed + pqmc::korobov_tail(p, alpha, gamma, g), pqmc::korobov_sum_total(p, alpha, gamma),
                      1e-13 * closed);
          extent *= p;
        }
      }
    }
  }
}

// The kernel ingredients int int K and int K(x, .) against midpoint quadrature.
TEST(KernelIngredients, DoubleIntegralMatchesQuadrature) {
  const std::vector<WeightedSpace> spaces{pqmc::sobolev_space({2}, {1.7}), anchored_at({2}, {1.7}, {0.3}),
                                          anchored_at({2}, {0.6}, {0.0}), unanchored({2}, {1.7})};
  const std::size_t q = 2000;
  for (const auto& space : spaces) {
    pqmc::CompensatedSum acc;
    for (std::size_t i = 0; i < q; ++i) {
      const double x[] = {(i + 0.5) / q};
      for (std::size_t k = 0; k < q; ++k) {
        const double y[] = {(k + 0.5) / q};
        acc.add(pqmc::kernel(space, x, y));
      }
    }
    EXPECT_NEAR(acc.value() / (q * q), space.product_zero(), 1e-6);
  }
  EXPECT_DOUBLE_EQ(unanchored({2}, {1.0}).product_zero(), 1.0);
}

TEST(KernelIngredients, SingleIntegralMatchesQuadrature) {
  const double gamma = 1.3;
  const std::size_t q = 20000;
  for (double x0 : {0.0, 0.15, 0.5, 0.8, 1.0}) {
    const double x[] = {x0};
    for (double w : {0.0, 0.4, 1.0}) {
      const auto one = pqmc::sobolev_space({2}, {gamma});
      const auto aw = anchored_at({2}, {gamma}, {w});
      const auto un = unanchored({2}, {gamma});
      pqmc::CompensatedSum s_one, s_w, s_un;
      for (std::size_t k = 0; k < q; ++k) {
        const double y[] = {(k + 0.5) / q};
        s_one.add(pqmc::kernel(one, x, y));
        s_w.add(pqmc::kernel(aw, x, y));
        s_un.add(pqmc::kernel(un, x, y));
      }
      EXPECT_NEAR(s_one.value() / q, 1.0 + gamma * (1.0 - x0 * x0) / 2.0, 1e-8);
      const double mad = [](double t) { return (t * t + (1.0 - t) * (1.0 - t)) / 2.0; }(x0);
      const double mad_w = (w * w + (1.0 - w) * (1.0 - w)) / 2.0;
      EXPECT_NEAR(s_w.value() / q, 1.0 + gamma * 0.5 * (std::abs(x0 - w) + mad_w - mad), 1e-8);
      EXPECT_NEAR(s_un.value() / q, 1.0, 1e-8);
    }
  }
}

TEST(AnchoredKernel, AnchorOneMatchesSobolevKernel) {
  const auto one = pqmc::sobolev_space({2, 3}, {0.9, 1.4});
  const auto aw = anchored_at({2, 3}, {0.9, 1.4}, {1.0, 1.0});
  pqmc::CounterRng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double x[] = {rng.uniform01(), rng.uniform01()}, y[] = {rng.uniform01(), rng.uniform01()};
    EXPECT_NEAR(pqmc::kernel(one, x, y), pqmc::kernel(aw, x, y), 1e-14);
  }
}

TEST(UnanchoredKernel, ExamplesAndSymmetry) {
  const auto un = unanchored({2}, {1.0});
  const double zero[] = {0.0};
  EXPECT_DOUBLE_EQ(pqmc::kernel(un, zero, zero), 4.0 / 3.0);
  const auto un2 = unanchored({2, 3}, {0.5, 2.0});
  pqmc::CounterRng rng(4);
  for (int i = 0; i < 200; ++i) {
    const double x[] = {rng.uniform01(), rng.uniform01()}, y[] = {rng.uniform01(), rng.uniform01()};
    EXPECT_DOUBLE_EQ(pqmc::kernel(un2, x, y), pqmc::kernel(un2, y, x));
  }
}

// Every kernel is positive semidefinite on random point sets.
TEST(Kernels, GramQuadraticFormsAreNonnegative) {
  const std::vector<WeightedSpace> spaces{pqmc::sobolev_space({2, 3}, {1.0, 0.5}),
                                          anchored_at({2, 3}, {1.0, 0.5}, {0.2, 0.7}),
                                          unanchored({2, 3}, {1.0, 0.5})};
  pqmc::CounterRng rng(5);
  for (const auto& space : spaces) {
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<std::vector<double>> pts(12, std::vector<double>(2));
      std::vector<double> c(12);
      for (auto& p : pts) p = {rng.uniform01(), rng.uniform01()};
      for (auto& v : c) v = rng.uniform(-1.0, 1.0);
      double form = 0.0;
      for (std::size_t a = 0; a < 12; ++a) {
        for (std::size_t b = 0; b < 12; ++b) form += c[a] * c[b] * pqmc::kernel(space, pts[a], pts[b]);
      }
      EXPECT_GE(form, -1e-12);
    }
  }
}

TEST(ShiftInvariantKernel, DiagonalEqualsBoxSum) {
  const auto space = pqmc::sobolev_space({2, 3}, {1.0, 0.5});
  const std::vector<unsigned> g{6, 4};
  const double x[] = {0.3, 0.8};
  const auto v = pqmc::shift_invariant_kernel(space, x, x, g);
  EXPECT_NEAR(v.value, pqmc::r_sum_box(2, 1.0, 6) * pqmc::r_sum_box(3, 0.5, 4), 1e-12);
  EXPECT_NEAR(v.tail, space.product_total() - v.value, 1e-13);
}

// Average of K(x (+) sigma, y (+) sigma) over 2^14 shift cells.
TEST(ShiftInvariantKernel, MatchesShiftQuadrature) {
  const std::vector<std::uint32_t> b{2};
  const auto space = pqmc::sobolev_space(b, {1.0});
  const std::vector<unsigned> g{10};
  const double x = 0.3, y = 0.7;
  const std::size_t cells = std::size_t{1} << 14;
  pqmc::CompensatedSum acc;
  for (std::size_t i = 0; i < cells; ++i) {
    const std::vector<double> sig{(i + 0.5) / cells};
    const auto sigma = pqmc::make_shift(b, sig, 64);
    const double sx[] = {pqmc::shift_point({{x}, b}, sigma).coords[0]};
    const double sy[] = {pqmc::shift_point({{y}, b}, sigma).coords[0]};
    acc.add(pqmc::kernel(space, sx, sy));
  }
  const double xs[] = {x}, ys[] = {y};
  const auto series = pqmc::shift_invariant_kernel(space, xs, ys, g);
  EXPECT_NEAR(acc.value() / cells, series.value, series.tail + 1e-3);
}

// The lag form is the g -> infinity limit of the series at Halton points.
TEST(ShiftInvariantKernel, LagFormMatchesSeries) {
  const std::vector<WeightedSpace> spaces{pqmc::sobolev_space({2, 3}, {1.0, 0.7}),
                                          pqmc::korobov_space({2, 3}, {1.0, 0.7}, {2.0, 3.0}),
                                          anchored_at({2, 3}, {1.0, 0.7}, {0.25, 0.5}), unanchored({2, 3}, {1.0, 0.7})};
  const std::vector<unsigned> g{14, 9};
  for (const auto& space : spaces) {
    for (std::uint64_t m : {0u, 3u, 10u}) {
      for (std::uint64_t n : {0u, 1u, 9u, 24u}) {
        const double xm[] = {pqmc::radical_inverse(2, m), pqmc::radical_inverse(3, m)};
        const double xn[] = {pqmc::radical_inverse(2, n), pqmc::radical_inverse(3, n)};
        const auto series = pqmc::shift_invariant_kernel(space, xm, xn, g);
        const auto d = static_cast<std::int64_t>(m) - static_cast<std::int64_t>(n);
        double lag = 1.0;
        for (std::size_t j = 0; j < 2; ++j) lag *= pqmc::shift_invariant_kernel_lag(space, j, d);
        // per-coordinate partial sums differ from the limit by at most the coordinate tails
        EXPECT_NEAR(series.value, lag, series.tail + 1e-10) << "m=" << m << " n=" << n;
      }
    }
  }
}

}  // namespace
