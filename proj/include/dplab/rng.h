#ifndef DPLAB_RNG_H_
#define DPLAB_RNG_H_

#include <cstdint>
#include <vector>

#include "dplab/rational.h"

namespace dplab {

// Counter-based splittable generator. Streams are keyed, not sequenced:
// Split(tag) derives an independent stream whose draws do not depend on how
// many draws other streams have consumed. This is what makes per-round,
// per-party, and per-trial randomness reproducible under refactoring.
// splitmix64 core; not cryptographic.
class Rng {
 public:
  explicit Rng(uint64_t seed) : key_(Mix(seed ^ 0x9e3779b97f4a7c15ULL)) {}

  Rng Split(uint64_t tag) const { return Rng(Derived(key_, tag)); }
  Rng Split2(uint64_t a, uint64_t b) const { return Split(a).Split(b); }

  uint64_t Next() { return Mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // Uniform in [0,1) with exactly 64 bits of resolution, as an exact rational.
  Rational NextUnitRational() {
    static const BigInt kTwo64 = BigInt(1) << 64;
    return Rational(BigInt(Next()), kTwo64);
  }

  double NextUnitDouble() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  // Index into a probability vector (masses must sum to at most 1; any
  // deficit, from rounding slop in callers, lands on the last index).
  size_t SampleIndex(const std::vector<Rational>& probs);

 private:
  static uint64_t Mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static uint64_t Derived(uint64_t key, uint64_t tag) {
    return Mix(key ^ Mix(tag + 0x632be59bd9b4e019ULL));
  }

  uint64_t key_;
  uint64_t counter_ = 0;
};

}  // namespace dplab

#endif  // DPLAB_RNG_H_
