#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace semrex {

/// Seeded generator with portable draws. The standard distributions are
/// implementation-defined, so index draws use rejection sampling on the raw
/// 64-bit engine output and give the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Seed for an independent stream, e.g. derive(global_seed, feature_index).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

  /// Uniform in [0, n). n must be positive.
  std::uint64_t index(std::uint64_t n);
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// k distinct indices from [0, n) in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace semrex
