#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace snn {

// Deterministic RNG wrapper. mt19937_64 output is fully specified by the
// standard, the <random> distributions are not, so every value mapping
// lives here and results are reproducible across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // [0, 1)
  double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double gauss(double mean, double stddev) {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // [0, n)
  std::int64_t below(std::int64_t n) {
    return std::int64_t(gen_() % std::uint64_t(n));
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[std::size_t(below(std::int64_t(i)))]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace snn
