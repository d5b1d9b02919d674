#include "mirror/rng.hpp"

namespace mirror {

CounterRng seed_stream(std::uint64_t master, std::uint64_t trial) {
  return seed_stream(master, trial, 0);
}

CounterRng seed_stream(std::uint64_t master, std::uint64_t trial,
                       std::uint64_t purpose) {
  std::uint64_t k = CounterRng::mix(master ^ 0x6a09e667f3bcc909ULL);
  k = CounterRng::mix(k ^ (trial + 0x3c6ef372fe94f82bULL));
  k = CounterRng::mix(k ^ (purpose * 0xa54ff53a5f1d36f1ULL));
  return CounterRng(k);
}

}  // namespace mirror
