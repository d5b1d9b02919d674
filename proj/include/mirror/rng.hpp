#pragma once

#include <cstdint>
#include <limits>

namespace mirror {

/// Counter-based generator: output n is a keyed mix of the counter n, so a
/// stream is fully determined by its key and no state is shared between
/// streams. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key = 0) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return mix(key_ + (++counter_) * kGamma); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Independent stream for trial `trial` under `master`. Same inputs give the
/// same stream.
CounterRng seed_stream(std::uint64_t master, std::uint64_t trial);

/// Sub-stream for a second purpose within one trial (e.g. bridge thinning).
CounterRng seed_stream(std::uint64_t master, std::uint64_t trial,
                       std::uint64_t purpose);

}  // namespace mirror
