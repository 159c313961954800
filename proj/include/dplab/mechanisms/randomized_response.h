#ifndef DPLAB_MECHANISMS_RANDOMIZED_RESPONSE_H_
#define DPLAB_MECHANISMS_RANDOMIZED_RESPONSE_H_

#include "dplab/mechanism.h"
#include "dplab/pmf.h"

namespace dplab {

// The outcome encoding shared by the one-shot and interactive variants:
// a pair [flag, bit].
Value RrOutcomeValue(RrFlag flag, int bit);

// Exact one-shot law on input bit b: (Exposed, b) with mass delta,
// (Private, b) with (1-delta) * rho / (1+rho), (Private, 1-b) with
// (1-delta) / (1+rho), where rho = e^epsilon.
DiscretePmf RrLaw(const PrivacyParams& params, int b);

// One-shot randomized response as a continual mechanism: answers a single
// input bit with an RrOutcomeValue, then halts. Non-bit input halts.
MechanismHandle MakeRr(const PrivacyParams& params);

// The interactive variant, parameterized by the secret bit. Its only query
// is Query(0); the first asks for the flag (Exposed w.p. delta), the second
// for the bit (exactly `bit` when Exposed, `bit` w.p. rho/(1+rho) when
// Private). A third query, or any other message, halts.
MechanismHandle MakeIrr(const PrivacyParams& params, int bit);

// Randomized response with the input bit baked in: answers the first query
// (any payload) with RrLaw(params, input_bit), then halts. Useful as a
// two-sided instance for the reduction tables, where the adversary's query
// carries no information.
MechanismHandle MakeRrSource(const PrivacyParams& params, int input_bit);

inline Message IrrQuery() { return Message::Query(Value(0)); }

}  // namespace dplab

#endif  // DPLAB_MECHANISMS_RANDOMIZED_RESPONSE_H_
