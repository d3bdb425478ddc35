#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace gate {

// splitmix64 mixing step. Used to derive independent child seeds (one per
// replication, one per purpose within a replication) from a master seed, so
// replication k is reproducible without running replications 0..k-1.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + (index + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seeded generator over std::mt19937_64 with explicit distribution
// transforms. The raw mt19937_64 stream is pinned by the standard; the
// std::*_distribution adaptors are not, so uniform/normal/bernoulli draws are
// spelled out here to keep streams identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log argument.
  double uniform_pos() {
    return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller (two uniforms per draw).
  double normal() {
    const double u = uniform_pos();
    const double v = uniform01();
    return std::sqrt(-2.0 * std::log(u)) *
           std::cos(2.0 * 3.14159265358979323846 * v);
  }

  int bernoulli(double p) { return uniform01() < p ? 1 : 0; }

  // Unbiased integer on [0, n) by rejection.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t threshold = (-n) % n;
    for (;;) {
      const std::uint64_t x = gen_();
      if (x >= threshold) return x % n;
    }
  }

  // Uniform sample of k items without replacement (partial Fisher-Yates).
  // The input vector is consumed; the sample keeps swap order.
  template <typename T>
  std::vector<T> take(std::vector<T> items, std::size_t k) {
    if (k > items.size()) k = items.size();
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(bounded(items.size() - i));
      std::swap(items[i], items[j]);
    }
    items.resize(k);
    return items;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace gate
