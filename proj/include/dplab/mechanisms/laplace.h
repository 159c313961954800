#ifndef DPLAB_MECHANISMS_LAPLACE_H_
#define DPLAB_MECHANISMS_LAPLACE_H_

#include "dplab/mechanism.h"
#include "dplab/noise.h"

namespace dplab {

// One-shot integer Laplace release: answers its single integer query with
// value + LapInt(sensitivity / epsilon), then halts. Non-integer input halts.
// Enumerable (single-branch) when the noise source is deterministic;
// otherwise it samples natively.
MechanismHandle MakeLaplaceInt(double epsilon, NoiseSource noise,
                               int sensitivity = 1);

}  // namespace dplab

#endif  // DPLAB_MECHANISMS_LAPLACE_H_
