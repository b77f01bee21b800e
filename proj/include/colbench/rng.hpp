#pragma once
#include <cstdint>

namespace colbench {

// Counter-based PRNG: output i is a hash of (key, i), so a stream is fully
// determined by (seed, stream) and can be split without shared state.
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0) : key_(derive_key(seed, stream)) {}

  uint64_t next_u64() { return finalize(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // 53-bit uniform in [0, 1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as a log() argument.
  double next_unit_open() { return 1.0 - next_unit(); }

  bool bernoulli(double p) { return next_unit() < p; }

  // Uniform integer in [0, k); k > 0. Multiply-shift, bias < 2^-64.
  uint64_t uniform_below(uint64_t k) {
    return static_cast<uint64_t>((static_cast<__uint128_t>(next_u64()) * k) >> 64);
  }

  uint64_t counter() const { return counter_; }

 private:
  static uint64_t finalize(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static uint64_t derive_key(uint64_t seed, uint64_t stream) {
    return finalize(finalize(seed + 0x9e3779b97f4a7c15ULL) + stream * 0xd1342543de82ef95ULL + 1);
  }

  uint64_t key_;
  uint64_t counter_ = 0;
};

}  // namespace colbench
