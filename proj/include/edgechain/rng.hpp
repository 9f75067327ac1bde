#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

#include "edgechain/crypto.hpp"

namespace edgechain {

namespace detail {
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}
}  // namespace detail

// Seeded random stream. The engine sequence (mt19937_64) is fixed by the
// standard, and all conversions to doubles/ranges are done here rather than
// through <random> distributions, whose output is implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(detail::splitmix64(seed)) {}

  // Independent named sub-stream of a run seed.
  static RngStream derive(std::uint64_t seed, std::string_view label) {
    return RngStream(detail::splitmix64(seed) ^ detail::fnv1a(label));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on [0, n); rejection sampling keeps it unbiased.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(uniform_below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Number of trials up to and including the first success.
  std::uint64_t geometric_trials(long double success_prob) {
    if (success_prob >= 1.0L) return 1;
    if (success_prob <= 0.0L) return std::numeric_limits<std::uint64_t>::max();
    const long double u = 1.0L - static_cast<long double>(uniform01());  // (0, 1]
    const long double k = std::floor(std::log(u) / std::log1p(-success_prob));
    if (k >= static_cast<long double>(std::numeric_limits<std::uint64_t>::max() - 1)) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(k) + 1;
  }

  crypto::Seed seed_bytes() {
    crypto::Seed s{};
    for (std::size_t i = 0; i < s.size(); i += 8) {
      std::uint64_t v = next_u64();
      for (std::size_t j = 0; j < 8; ++j) s[i + j] = static_cast<std::uint8_t>(v >> (8 * j));
    }
    return s;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace edgechain
