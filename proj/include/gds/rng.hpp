#pragma once

#include <cstdint>

namespace gds {

// Counter-based stream: the i-th draw is a pure function of (key, i), so a
// stream is fully determined by its seed and how many values were taken.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t at(std::uint64_t counter) const {
    // SplitMix64 finalizer over key + counter * golden gamma.
    std::uint64_t z = key_ + (counter + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t next() { return at(counter_++); }

  // Uniform integer in [0, n); n > 0.
  std::uint32_t below(std::uint32_t n) {
    return static_cast<std::uint32_t>(((next() >> 32) * n) >> 32);
  }

  // Uniform double in [0, 1).
  double uniform() { return (next() >> 11) * 0x1.0p-53; }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace gds
