#pragma once

#include <cstdint>
#include <vector>

namespace scaffold {

// Deterministic 64-bit stream (splitmix64). Everything that draws randomness
// (scene init, menu sampling, random policy, bootstrap) goes through this so
// that identical seeds give identical bytes on every platform; the standard
// library's distributions are implementation-defined and would not.
class Rng {
public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [lo, hi], inclusive. Rejection sampling.
  int uniform_int(int lo, int hi) {
    uint64_t range = static_cast<uint64_t>(hi) - static_cast<uint64_t>(lo) + 1;
    uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return lo + static_cast<int>(v % range);
  }

  size_t uniform_index(size_t n) {
    return static_cast<size_t>(uniform_int(0, static_cast<int>(n) - 1));
  }

  // Partial Fisher-Yates: shuffles the first k slots, each holding a uniform
  // draw without replacement from the whole vector.
  template <typename T>
  void partial_shuffle(std::vector<T>& items, size_t k) {
    size_t n = items.size();
    if (k > n) k = n;
    for (size_t i = 0; i < k; ++i) {
      size_t j = static_cast<size_t>(uniform_int(static_cast<int>(i), static_cast<int>(n) - 1));
      std::swap(items[i], items[j]);
    }
  }

private:
  uint64_t state_;
};

// Stable avalanche of two seeds into one; used to derive per-session and
// per-component sub-streams from (master_seed, session_index).
inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 0x632BE59BD9B4E019ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace scaffold
