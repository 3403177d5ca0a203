#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace gdlspg {

// Seeded RNG. Uniform doubles are derived from the raw 64-bit stream by hand
// so sampling is reproducible across standard library implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // uniform integer in [0, n)
  std::size_t below(std::size_t n) {
    std::size_t i = static_cast<std::size_t>(next_double() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace gdlspg
