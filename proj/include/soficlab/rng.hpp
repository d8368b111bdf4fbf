#pragma once

// Deterministic counter-based random numbers. Every consumer derives a
// stream from (seed, stream-index); draws depend only on that pair and the
// draw counter, never on thread scheduling, so experiment results are
// bit-identical across runs, platforms, and worker counts.
//
// The generator is the SplitMix64 output function applied to
// key + counter * golden-gamma, where key itself mixes seed and stream
// index. Pure 64-bit integer arithmetic throughout.

#include <cstdint>
#include <vector>

namespace soficlab {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : key_(mix64(seed ^ mix64(stream ^ 0x5851f42d4c957f2dull))), counter_(0) {}

  std::uint64_t next() { return mix64(key_ + ++counter_ * 0x9e3779b97f4a7c15ull); }

  // Uniform in [0, n), bias-free via rejection on the top multiple of n.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = n * (~0ull / n);
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % n;
  }

  // In-place Fisher-Yates shuffle; uniform over permutations of `items`.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace soficlab
