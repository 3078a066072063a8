#pragma once

#include <cmath>
#include <cstdint>

namespace blpp {

// Deterministic stream derivation.
//
// Every random quantity in the lab is drawn from a stream addressed by a
// chain of 64-bit tags hashed onto a master seed:
//
//   key(seed, a, b, ...) = absorb(...absorb(absorb(seed, a), b)...)
//   absorb(k, t) = mix(k ^ (t * 0x9E3779B97F4A7C15))
//
// where mix is the splitmix64 finalizer.  The chain is stable and documented;
// identical (seed, tag chain) always yields the identical stream, and streams
// with different chains are independent for all practical purposes.  Standard
// tag layout used by the samplers:
//
//   field line:    seed -> TAG_LINE -> level -> TAG_RIGHT/TAG_LEFT
//   replica r:     seed -> TAG_REPLICA -> r -> ...
//   seed line:     seed -> TAG_SEED_LINE -> level
//   bridge draws:  seed -> TAG_BRIDGE -> level
inline uint64_t mix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

struct StreamKey {
  uint64_t state = 0;

  static StreamKey root(uint64_t seed) { return StreamKey{mix64(seed)}; }
  StreamKey child(uint64_t tag) const {
    return StreamKey{mix64(state ^ (tag * 0x9E3779B97F4A7C15ull))};
  }
  StreamKey child_signed(long tag) const {
    return child(static_cast<uint64_t>(static_cast<int64_t>(tag)));
  }
};

namespace tag {
inline constexpr uint64_t kLine = 1;
inline constexpr uint64_t kLeft = 2;
inline constexpr uint64_t kRight = 3;
inline constexpr uint64_t kSeedLine = 4;
inline constexpr uint64_t kBridge = 5;
inline constexpr uint64_t kReplica = 6;
inline constexpr uint64_t kExperiment = 7;
inline constexpr uint64_t kDrift = 8;
}  // namespace tag

// xoshiro256++ seeded from a StreamKey by four splitmix64 rounds.
class Rng {
 public:
  explicit Rng(StreamKey key) {
    uint64_t s = key.state;
    for (auto& word : s_) {
      s = mix64(s);
      word = s;
    }
    have_spare_ = false;
    spare_ = 0.0;
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  // Uniform on (0,1), safe for logarithms.
  double uniform_open01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via the polar method (deterministic per stream).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, w, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      w = 2.0 * uniform01() - 1.0;
      s = u * u + w * w;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = w * f;
    have_spare_ = true;
    return u * f;
  }

  double exponential(double rate) { return -std::log(uniform_open01()) / rate; }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t s_[4];
  bool have_spare_;
  double spare_;
};

}  // namespace blpp
