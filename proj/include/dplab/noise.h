#ifndef DPLAB_NOISE_H_
#define DPLAB_NOISE_H_

#include <cstdint>
#include <vector>

#include "dplab/rng.h"

namespace dplab {

// Integer-discretized Laplace noise with three modes:
//   Seeded    — draw Lap(scale) via inverse CDF, round ties-up to an integer.
//   Zero      — every draw is 0 (for exact hand-traceable runs).
//   Scripted  — replay a fixed list of draws (rounded the same way), then
//               throw when exhausted.
// Draws are rounded at the source; consumers add them to exact integers and
// compare against exact thresholds, so the only approximation in the whole
// pipeline is the noise itself.
//
// Deterministic sources are value types consumed without mutation: a
// mechanism peeks the next draw inside (const) step enumeration and stores
// Advanced() copies in successor states, so re-enumerating a state never
// desynchronizes the script.
class NoiseSource {
 public:
  enum class Mode { kSeeded, kZero, kScripted };

  static NoiseSource Seeded() { return NoiseSource(Mode::kSeeded, {}); }
  static NoiseSource Zero() { return NoiseSource(Mode::kZero, {}); }
  static NoiseSource Scripted(std::vector<double> draws) {
    return NoiseSource(Mode::kScripted, std::move(draws));
  }

  Mode mode() const { return mode_; }
  // Deterministic sources make mechanisms enumerable (single-branch steps).
  bool IsDeterministic() const { return mode_ != Mode::kSeeded; }

  // Next integer-rounded draw of a deterministic source, without consuming
  // it. Throws on Seeded sources and on exhausted scripts.
  int64_t PeekLapInt(double scale) const;
  // Copy with the script cursor moved past one draw.
  NoiseSource Advanced() const;
  // One integer-rounded Lap(scale) draw, consuming it. `rng` is consulted in
  // Seeded mode only.
  int64_t LapInt(double scale, Rng& rng);

 private:
  NoiseSource(Mode mode, std::vector<double> draws)
      : mode_(mode), scripted_(std::move(draws)) {}

  Mode mode_;
  std::vector<double> scripted_;
  size_t next_ = 0;
};

}  // namespace dplab

#endif  // DPLAB_NOISE_H_
