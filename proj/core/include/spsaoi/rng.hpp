#ifndef SPSAOI_RNG_HPP
#define SPSAOI_RNG_HPP

#include <cstdint>

namespace spsaoi {

/// Counter-based generator: the n-th output is a pure function of
/// (seed, n), using the splitmix64 increment and finalizer. Draws are
/// platform independent, which pins simulated trajectories bit-exactly
/// to the seed.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform index in {0, ..., n-1}.
  std::uint64_t next_index(std::uint64_t n) {
    const auto i = static_cast<std::uint64_t>(next_double() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace spsaoi

#endif  // SPSAOI_RNG_HPP
