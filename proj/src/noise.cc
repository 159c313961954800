#include "dplab/noise.h"

#include <cmath>
#include <stdexcept>

namespace dplab {

namespace {

int64_t RoundTiesUpDouble(double x) {
  return static_cast<int64_t>(std::floor(x + 0.5));
}

}  // namespace

int64_t NoiseSource::PeekLapInt(double scale) const {
  switch (mode_) {
    case Mode::kZero:
      return 0;
    case Mode::kScripted: {
      if (next_ >= scripted_.size()) {
        throw std::runtime_error("NoiseSource: scripted draws exhausted");
      }
      return RoundTiesUpDouble(scripted_[next_]);
    }
    case Mode::kSeeded:
      throw std::logic_error("NoiseSource: cannot peek a seeded source");
  }
  (void)scale;
  return 0;
}

NoiseSource NoiseSource::Advanced() const {
  NoiseSource copy = *this;
  if (mode_ == Mode::kScripted) ++copy.next_;
  return copy;
}

int64_t NoiseSource::LapInt(double scale, Rng& rng) {
  switch (mode_) {
    case Mode::kZero:
      return 0;
    case Mode::kScripted: {
      if (next_ >= scripted_.size()) {
        throw std::runtime_error("NoiseSource: scripted draws exhausted");
      }
      return RoundTiesUpDouble(scripted_[next_++]);
    }
    case Mode::kSeeded: {
      // Inverse CDF on u uniform in (-1/2, 1/2).
      double u = rng.NextUnitDouble() - 0.5;
      if (u == -0.5) u = 0.0;
      double draw =
          -scale * std::copysign(1.0, u) * std::log1p(-2.0 * std::fabs(u));
      return RoundTiesUpDouble(draw);
    }
  }
  return 0;
}

}  // namespace dplab
