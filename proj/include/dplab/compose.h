#ifndef DPLAB_COMPOSE_H_
#define DPLAB_COMPOSE_H_

#include <memory>
#include <stdexcept>
#include <string>

#include "dplab/ipm.h"
#include "dplab/mechanism.h"
#include "dplab/transcript.h"

namespace dplab {

// Relay/loop budget: converts a non-terminating post-processing loop into a
// diagnosable error. Every IPM in this library terminates well below this.
inline constexpr int64_t kDefaultLoopBound = 1'000'000;

struct LoopBoundExceeded : std::runtime_error {
  LoopBoundExceeded(const std::string& what, int64_t count)
      : std::runtime_error(what + " (round-trips: " + std::to_string(count) +
                           ")"),
        round_trips(count) {}
  int64_t round_trips;
};

// The post-processed mechanism ipm ∘* mech: each incoming message enters the
// post-processor from the left; while the post-processor emits right
// messages, they round-trip through the wrapped mechanism; the first left
// emission is the answer. Halt short-circuits: a Halt emitted by either part
// makes the composite answer Halt and become absorbed.
//
// The composite enumerates exactly when both parts do, and always samples.
MechanismHandle ComposePost(IpmHandle ipm, MechanismHandle mech,
                            int64_t loop_bound = kDefaultLoopBound);

// The relay chain of two post-processors, left ∘* right: left messages enter
// `left`; right messages enter `right`; internal handoffs are delivered to
// the neighbor with the side tag flipped (a message `left` sends rightward
// arrives at `right` as a left input, and vice versa). The loop runs until a
// message exits the chain on either end.
IpmHandle Chain(IpmHandle left, IpmHandle right,
                int64_t loop_bound = kDefaultLoopBound);

struct InteractionError : std::runtime_error {
  InteractionError(const std::string& what, Transcript partial)
      : std::runtime_error(what), partial_transcript(std::move(partial)) {}
  Transcript partial_transcript;
};

// Runs one full interaction. The adversary speaks first (it is stepped on the
// empty message); the interaction ends when either side emits Halt or after
// max_rounds adversary messages (then: InteractionError with the partial
// transcript). Per-round randomness is keyed (seed, round, party), so
// identical seeds replay bit-identical transcripts.
Transcript RunInteraction(MechanismHandle adversary, MechanismHandle mech,
                          uint64_t seed, int64_t max_rounds = 100'000);

}  // namespace dplab

#endif  // DPLAB_COMPOSE_H_
