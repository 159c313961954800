#ifndef DPLAB_MECHANISMS_COUNTERS_H_
#define DPLAB_MECHANISMS_COUNTERS_H_

#include <cstdint>

#include "dplab/mechanism.h"
#include "dplab/noise.h"

namespace dplab {

// Continual binary-tree counter over horizon T: each step takes an integer
// increment and answers a noisy running total. Per-level budget is
// epsilon / ceil(log2 T), one fresh integer-rounded Laplace draw per step
// (on the tree node completed by that step). Steps beyond T halt.
MechanismHandle MakeBinaryCounter(double epsilon, int64_t T,
                                  NoiseSource noise);

// d independent binary counters with budget epsilon/d each. Input is a
// d-vector of integers, answer the d-vector of estimates; the noise source
// is consumed coordinate-major within a step. An (epsilon, delta) claim for
// this mechanism is satisfied by the same construction, so there is no
// separate delta variant.
MechanismHandle MakeDCounter(double epsilon, int d, int64_t T,
                             NoiseSource noise);

}  // namespace dplab

#endif  // DPLAB_MECHANISMS_COUNTERS_H_
