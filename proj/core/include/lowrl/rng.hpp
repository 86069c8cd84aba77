#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace lowrl {

// Counter-based pseudorandom stream built on the splitmix64 finalizer.
// A stream is addressed by a key derived from (master seed, logical
// coordinates); draws are pure functions of (key, counter), so parallel
// workers that own disjoint streams produce schedule-independent results.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key) {}

  RngStream(std::uint64_t master, std::initializer_list<std::uint64_t> words)
      : key_(master) {
    for (auto w : words) key_ = mix(key_, w);
  }

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return finalize(a + 0x9e3779b97f4a7c15ull * (b + 1));
  }

  std::uint64_t next_u64() {
    return finalize(key_ + 0x9e3779b97f4a7c15ull * ++counter_);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; consumes two words per draw.
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  static std::uint64_t finalize(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace lowrl
