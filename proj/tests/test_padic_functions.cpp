#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "pqmc/halton.hpp"
#include "pqmc/padic_functions.hpp"

namespace {

using cplx = std::complex<double>;

cplx e(double turns) { return std::polar(1.0, 2.0 * std::numbers::pi * turns); }

TEST(DigitInfo, Examples) {
  const auto zero = pqmc::digit_info(3, 0);
  EXPECT_EQ(zero.length, 0u);
  const auto k = pqmc::digit_info(3, 5);  // 5 = 2 + 1*3
  EXPECT_EQ(k.length, 2u);
  EXPECT_EQ(k.leading, 1u);
  EXPECT_EQ(static_cast<std::uint64_t>(k.modulus), 9u);
  EXPECT_EQ(static_cast<std::uint64_t>(k.reflected), 7u);  // phi_3(5) * 9
}

TEST(Beta, Examples) {
  EXPECT_EQ(pqmc::beta(2, 0, 0.3), cplx(1.0));
  // beta_1 in base 2 is the Walsh function: +1 on [0, 1/2), -1 on [1/2, 1)
  EXPECT_NEAR(std::abs(pqmc::beta(2, 1, 0.25) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(pqmc::beta(2, 1, 0.75) + 1.0), 0.0, 1e-15);
  // base 3, k = 1: e(x_0 / 3) on the first digit x_0
  EXPECT_NEAR(std::abs(pqmc::beta(3, 1, 0.5) - e(1.0 / 3.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(pqmc::beta(3, 2, 0.9) - e(4.0 / 3.0)), 0.0, 1e-15);
}

TEST(Beta, RejectsBadInput) {
  EXPECT_THROW(pqmc::beta(4, 1, 0.5), pqmc::InvalidBase);
  EXPECT_THROW(pqmc::beta(2, 1, 1.0), pqmc::DomainError);
  EXPECT_THROW(pqmc::beta(2, 1, -0.1), pqmc::DomainError);
}

// beta_k(x) = e(phi_p(k) * z) with z the first a digits of phi_p^+(x), as an integer.
TEST(Beta, MatchesCharacterDefinition) {
  pqmc::CounterRng rng(11);
  for (std::uint32_t p : {2u, 3u, 5u, 7u}) {
    const auto P = pqmc::default_precision(p);
    for (int i = 0; i < 300; ++i) {
      const double x = rng.uniform01();
      const std::uint64_t k = rng.uniform_below(2000);
      const auto z = pqmc::monna_inverse(x, p, P);
      const auto info = pqmc::digit_info(p, k);
      double zint = 0.0;
      for (std::size_t r = info.length; r-- > 0;) zint = zint * p + z.digit(r);
      const double theta = pqmc::radical_inverse(p, k);
      const double turns = std::fmod(theta * zint, 1.0);
      EXPECT_NEAR(std::abs(pqmc::beta(p, k, x) - e(turns)), 0.0, 1e-9);
      EXPECT_NEAR(std::abs(pqmc::beta(p, k, x) - pqmc::character(k, z)), 0.0, 1e-14);
    }
  }
}

// beta_k is constant on p-adic cells of level a.
TEST(Beta, ConstantOnCells) {
  for (std::uint32_t p : {2u, 3u, 5u}) {
    for (std::uint64_t k = 1; k < std::uint64_t{p} * p; ++k) {
      const auto info = pqmc::digit_info(p, k);
      const double cells = static_cast<double>(static_cast<std::uint64_t>(info.modulus));
      for (int c = 0; c < static_cast<int>(cells); ++c) {
        const auto lo = pqmc::beta(p, k, (c + 0.01) / cells);
        const auto hi = pqmc::beta(p, k, (c + 0.99) / cells);
        EXPECT_NEAR(std::abs(lo - hi), 0.0, 1e-14);
      }
    }
  }
}

TEST(Beta, IsMultiplicativeUnderShift) {
  const std::vector<std::uint32_t> b{3};
  const auto sigma = pqmc::sample_shift(b, 41, 8, 1);
  pqmc::CounterRng rng(12);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform01();
    const std::uint64_t k = 1 + rng.uniform_below(500);
    const double y = pqmc::shift_point({{x}, b}, sigma).coords[0];
    const auto expect = pqmc::beta(3, k, x) * pqmc::character(k, sigma.sigma[0]);
    EXPECT_NEAR(std::abs(pqmc::beta(3, k, y) - expect), 0.0, 1e-12);
  }
}

TEST(GramCheck, OrthonormalSystems) {
  EXPECT_LT(pqmc::gram_check(2, 4, 16), 1e-12);
  EXPECT_LT(pqmc::gram_check(3, 3, 27), 1e-12);
  EXPECT_LT(pqmc::gram_check(5, 2, 25), 1e-12);
  EXPECT_LT(pqmc::gram_check(3, 2, 81), 1e-12);
  EXPECT_THROW(pqmc::gram_check(3, 2, 10), pqmc::ResolutionError);
}

TEST(FrequencyIndex, Theta) {
  const pqmc::FrequencyIndex k({2, 3}, {1, 1});
  EXPECT_DOUBLE_EQ(k.theta().value(), 0.5 + 1.0 / 3.0);
  const pqmc::FrequencyIndex wrap({2, 3}, {1, 2});  // 1/2 + 2/3 = 7/6
  EXPECT_DOUBLE_EQ(wrap.theta().value(), 1.0 / 6.0);
  EXPECT_TRUE(pqmc::FrequencyIndex({2, 3}, {0, 0}).is_zero());
  EXPECT_THROW(pqmc::FrequencyIndex({2, 3}, {1}), pqmc::DimensionMismatch);
}

TEST(CharSum, Examples) {
  const pqmc::FrequencyIndex zero({2, 3}, {0, 0});
  EXPECT_EQ(pqmc::char_sum_halton(zero, 37), cplx(37.0));
  // theta = 1/2: sum of (-1)^n
  const pqmc::FrequencyIndex half({2}, {1});
  EXPECT_NEAR(std::abs(pqmc::char_sum_halton(half, 10)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(pqmc::char_sum_halton(half, 11) - 1.0), 0.0, 1e-14);
}

TEST(CharSum, ClosedFormMatchesDirectSum) {
  pqmc::CounterRng rng(13);
  const std::vector<std::vector<std::uint32_t>> cases{{2}, {3}, {2, 3}, {2, 3, 5}};
  for (const auto& bases : cases) {
    for (int i = 0; i < 25; ++i) {
      std::vector<std::uint64_t> k(bases.size());
      for (auto& v : k) v = rng.uniform_below(300);
      const pqmc::FrequencyIndex f(bases, k);
      const std::uint64_t n = 1 + rng.uniform_below(700);
      const auto closed = pqmc::char_sum_halton(f, n);
      const auto direct = pqmc::char_sum_halton_direct(f, n);
      EXPECT_NEAR(std::abs(closed - direct), 0.0, 1e-9 * static_cast<double>(n));
      if (!f.is_zero()) {
        const auto& th = f.theta();
        EXPECT_NEAR(pqmc::fejer_sq(th.numerator, th.denominator, n), std::norm(closed), 1e-8 * n * n);
      }
    }
  }
}

// |S_N(k)| |sin(pi theta)| <= 1 for every N.
TEST(CharSum, GeometricBound) {
  pqmc::CounterRng rng(14);
  for (int i = 0; i < 2000; ++i) {
    const pqmc::FrequencyIndex f({2, 3, 5}, {1 + rng.uniform_below(100), rng.uniform_below(100), rng.uniform_below(100)});
    const double sn = std::abs(std::sin(std::numbers::pi * f.theta().value()));
    const std::uint64_t n = 1 + rng.uniform_below(1u << 20);
    EXPECT_LE(std::abs(pqmc::char_sum_halton(f, n)) * sn, 1.0 + 1e-9);
  }
}

TEST(CharSum, ShiftFactorIsUnimodular) {
  const std::vector<std::uint32_t> b{2, 3};
  const auto sigma = pqmc::sample_shift(b, 41, 1, 2);
  const pqmc::FrequencyIndex k(b, {5, 7});
  EXPECT_NEAR(std::abs(pqmc::shift_factor(k, sigma)), 1.0, 1e-15);

  // Shifting all points multiplies the sum by beta_k(sigma).
  pqmc::HaltonSpec spec{b, 0, sigma};
  const auto pts = pqmc::halton_block(spec, 100);
  cplx shifted = 0.0;
  for (std::size_t n = 0; n < pts.size(); ++n) shifted += pqmc::beta_multi(k, pts[n]);
  EXPECT_NEAR(std::abs(shifted - pqmc::shift_factor(k, sigma) * pqmc::char_sum_halton(k, 100)), 0.0, 1e-10);
}

TEST(IndexBox, CountsAndEnumeration) {
  pqmc::IndexBox box{{2, 3}, {2, 1}};
  EXPECT_EQ(box.count(), 12u);
  std::size_t seen = 0;
  box.for_each([&](auto) { ++seen; });
  EXPECT_EQ(seen, 12u);

  box.mode = pqmc::BoxMode::punctured;
  EXPECT_EQ(box.count(), 11u);
  seen = 0;
  box.for_each([&](auto k) {
    EXPECT_FALSE(k[0] == 0 && k[1] == 0);
    ++seen;
  });
  EXPECT_EQ(seen, 11u);

  box.mode = pqmc::BoxMode::interior;
  EXPECT_EQ(box.count(), 6u);
  box.for_each([&](auto k) {
    EXPECT_GE(k[0], 1u);
    EXPECT_GE(k[1], 1u);
  });

  const pqmc::IndexBox huge{{2, 3}, {60, 40}};
  EXPECT_FALSE(huge.count().has_value());
  const pqmc::IndexBox bad{{2, 3}, {2, 0}};
  EXPECT_THROW(bad.for_each([](auto) {}), pqmc::DomainError);
}

}  // namespace
