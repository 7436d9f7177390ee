#pragma once

// Counter-based random streams: every draw is a hash of (seed, stream, counter),
// so a realization's couplings do not depend on which worker produced them.

#include <cstdint>

namespace rsbound {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

class CounterStream {
 public:
  CounterStream(std::uint64_t master_seed, std::uint64_t stream)
      : key_(splitmix64(splitmix64(master_seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ull))) {}

  std::uint64_t next_u64() { return splitmix64(key_ ^ splitmix64(counter_++)); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace rsbound
