#pragma once

#include <cstdint>

namespace celab {

// Counter-based SplitMix64 stream. Output i is mix(key + i * gamma), so a
// stream is fully described by (key, counter) and child streams can be
// derived from the key alone, independent of how much the parent consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ kSeedSalt)) {}

  std::uint64_t next() {
    ++counter_;
    return mix(key_ + counter_ * kGamma);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    // Lemire's multiply-shift with rejection of the biased low zone.
    std::uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = next();
        m = static_cast<__uint128_t>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform word with the low `bits` bits random and the rest zero.
  std::uint64_t bits(int bits) {
    if (bits <= 0) return 0;
    const std::uint64_t w = next();
    return bits >= 64 ? w : (w & ((std::uint64_t{1} << bits) - 1));
  }

  bool coin() { return (next() >> 63) != 0; }

  // Independent stream labelled by `id`. Does not advance this stream.
  Rng child(std::uint64_t id) const {
    Rng r(0);
    r.key_ = mix(key_ ^ mix(id + kChildSalt));
    r.counter_ = 0;
    return r;
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kSeedSalt = 0x243F6A8885A308D3ULL;
  static constexpr std::uint64_t kChildSalt = 0x13198A2E03707344ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Seed of the index-th child of a master seed; Rng(derive_seed(m, i))
// reproduces that child stream on its own.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return Rng(master).child(index).next();
}

}  // namespace celab
