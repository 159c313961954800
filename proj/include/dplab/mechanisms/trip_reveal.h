#ifndef DPLAB_MECHANISMS_TRIP_REVEAL_H_
#define DPLAB_MECHANISMS_TRIP_REVEAL_H_

#include "dplab/mechanism.h"

namespace dplab {

// Two-query bit mechanism with an armed/tripped latch. While armed, a bit
// query leaves it armed and answers Top with probability 1 - delta, or trips
// it and answers Bottom with probability delta. Once tripped, a bit query is
// answered by the bit itself. Accepts at most two bit queries; anything else
// halts. Tripping on the first query therefore reveals the second input bit
// exactly, which is what makes it the canonical delta-mass counterexample.
MechanismHandle MakeTripReveal(const Rational& delta);

}  // namespace dplab

#endif  // DPLAB_MECHANISMS_TRIP_REVEAL_H_
