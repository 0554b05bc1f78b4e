#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pqmc/exceptions.hpp"

namespace pqmc {

/// Deterministic trial division; bases in practice stay below a few hundred.
constexpr bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::uint64_t d = 3; d * d <= n; d += 2) {
    if (n % d == 0) return false;
  }
  return true;
}

inline void require_prime(std::uint64_t p) {
  if (!is_prime(p)) {
    throw InvalidBase("base " + std::to_string(p) + " is not prime");
  }
}

/// Every base prime and no base repeated.
inline void validate_bases(std::span<const std::uint32_t> bases) {
  if (bases.empty()) throw InvalidBase("at least one base is required");
  for (std::size_t i = 0; i < bases.size(); ++i) {
    require_prime(bases[i]);
    for (std::size_t j = 0; j < i; ++j) {
      if (bases[i] == bases[j]) {
        throw InvalidBase("bases must be pairwise distinct (" +
                          std::to_string(bases[i]) + " repeated)");
      }
    }
  }
}

/// The first `count` primes, by a sieve sized from the n-th prime upper bound
/// p_n < n (ln n + ln ln n) for n >= 6.
inline std::vector<std::uint32_t> first_primes(std::size_t count) {
  std::vector<std::uint32_t> primes;
  if (count == 0) return primes;
  std::size_t limit = 15;
  if (count >= 6) {
    const double n = static_cast<double>(count);
    limit = static_cast<std::size_t>(n * (std::log(n) + std::log(std::log(n)))) + 1;
  }
  std::vector<bool> composite(limit + 1, false);
  primes.reserve(count);
  for (std::size_t i = 2; i <= limit && primes.size() < count; ++i) {
    if (composite[i]) continue;
    primes.push_back(static_cast<std::uint32_t>(i));
    for (std::size_t m = i * i; m <= limit; m += i) composite[m] = true;
  }
  return primes;
}

}  // namespace pqmc
