#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>

namespace vra {

/// splitmix64 stream. Every seeded decision in the toolkit (protocol splits,
/// validation subsets, selection iterations, synthetic data) draws from this
/// generator so that a seed reproduces the same sequence in any language.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Integer in [0, n). Plain modulo reduction; the bias is negligible for
  /// the group counts used here and keeps the definition portable.
  std::uint64_t below(std::uint64_t n) noexcept { return next() % n; }

  /// Standard normal via Box-Muller (one output per two uniforms).
  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

  /// Standard Laplace (unit scale) by inverse CDF.
  double laplace() noexcept {
    const double u = uniform() - 0.5;
    const double a = 1.0 - 2.0 * std::abs(u);
    return (u < 0 ? 1.0 : -1.0) * std::log(a > 0 ? a : 0x1.0p-53);
  }

  /// Fisher-Yates: for i = n-1 down to 1, swap(v[i], v[below(i+1)]).
  template <typename T>
  void shuffle(std::span<T> v) noexcept {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

/// Derives an independent stream seed from a base seed and a salt.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) noexcept {
  SplitMix64 mix(base ^ (salt * 0xD1B54A32D192ED03ULL));
  return mix.next();
}

}  // namespace vra
