#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace cloze {

// Seeded generator with named substreams. std::mt19937_64 is fully specified
// by the standard; the distribution helpers below are hand-rolled because the
// standard library's distributions are not bit-reproducible across
// implementations. Training code derives one substream per purpose
// (initialization, shuffling, dropout) so disabling one never shifts another.
class Rng {
 public:
  explicit Rng(uint64_t seed) : base_seed_(seed), engine_(splitmix64(seed)) {}

  // Independent generator for a named purpose, derived from the base seed.
  Rng stream(std::string_view tag) const {
    uint64_t h = 1469598103934665603ull;  // FNV-1a over the tag
    for (char c : tag) {
      h ^= static_cast<uint8_t>(c);
      h *= 1099511628211ull;
    }
    return Rng(splitmix64(base_seed_ ^ h));
  }

  uint64_t next_u64() { return engine_(); }

  // Uniform in [lo, hi], inclusive, unbiased via rejection.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<int64_t>(next_u64());  // full range
    uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    uint64_t draw;
    do {
      draw = next_u64();
    } while (draw >= limit);
    return lo + static_cast<int64_t>(draw % span);
  }

  // Uniform in [lo, hi) with 53-bit resolution.
  double uniform_real(double lo, double hi) {
    double unit = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return lo + unit * (hi - lo);
  }

  // Box-Muller; draws two uniforms per call, no cached spare.
  double normal(double mean, double stddev) {
    double u1 = uniform_real(0.0, 1.0);
    double u2 = uniform_real(0.0, 1.0);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(6.283185307179586476925286766559 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  static uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  uint64_t base_seed_;
  std::mt19937_64 engine_;
};

}  // namespace cloze
