#pragma once

#include <cstdint>
#include <initializer_list>

namespace pqmc {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Folds a key tuple into one 64-bit stream key.
constexpr std::uint64_t derive_key(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::uint64_t part : parts) h = mix64(h ^ mix64(part));
  return h;
}

/// Counter-based random stream: output i is a pure function of (key, i), so
/// streams are reproducible on any platform and independent of thread layout.
///
/// Distributions are implemented here rather than taken from <random>, whose
/// distribution algorithms are implementation-defined.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~std::uint64_t{0}; }

  constexpr result_type operator()() { return mix64(key_ ^ mix64(counter_++)); }

  /// Unbiased integer in [0, bound) by multiply-shift with rejection.
  constexpr std::uint64_t uniform_below(std::uint64_t bound) {
    using u128 = unsigned __int128;
    u128 m = static_cast<u128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<u128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform01() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  constexpr double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  constexpr std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace pqmc
