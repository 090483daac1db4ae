#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace genesis {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seedable generator with a fully pinned-down algorithm so results are
// reproducible across platforms and runs:
//   engine        std::mt19937_64 (bit-exact per the C++ standard)
//   uniform01     (engine() >> 11) * 2^-53, in [0, 1)
//   normal        Box-Muller on fresh draws, no cached second value
//   bounded ints  modulo with rejection (no bias)
//   substreams    derived by splitmix64 mixing of (seed, tag)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal(double mean, double stddev) {
    // u1 in (0, 1] keeps the log finite
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(6.283185307179586476925287 * u2);
  }

  // uniform integer in [0, n)
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // Independent generator for a named purpose; same (seed, tag) always
  // yields the same stream.
  Rng substream(std::uint64_t tag) const {
    return Rng(splitmix64(splitmix64(seed_) ^ splitmix64(tag)));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace genesis
