#ifndef DPLAB_MECHANISMS_SPARSE_VECTOR_H_
#define DPLAB_MECHANISMS_SPARSE_VECTOR_H_

#include <cstdint>
#include <vector>

#include "dplab/mechanism.h"
#include "dplab/noise.h"
#include "dplab/query_fn.h"

namespace dplab {

// Above-threshold test over an accumulating integer vector. State starts at
// h0 with a threshold perturbation tau ~ Lap(1/epsilon_internal) drawn once.
// Each step takes Query([x, thresh]) where x is a d-vector of increments and
// thresh an exact rational (or integer) threshold; it accumulates h += x and
// answers Top (then halts) iff
//   q(h) + Lap(2/epsilon_internal)  >  thresh + tau,
// else Bottom. Both sides are exact: noise is integer-rounded at the draw.
// Dimension mismatch or any other message halts. A mechanism constructed
// with internal budget e satisfies 2e-DP, which is how the registry
// certifies it.
//
// With a deterministic noise source tau is consumed at construction; a
// seeded source draws it lazily on the first step.
MechanismHandle MakeSvt(double epsilon_internal, QueryFn q,
                        std::vector<int64_t> h0, NoiseSource noise);

}  // namespace dplab

#endif  // DPLAB_MECHANISMS_SPARSE_VECTOR_H_
