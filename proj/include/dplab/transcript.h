#ifndef DPLAB_TRANSCRIPT_H_
#define DPLAB_TRANSCRIPT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dplab/message.h"

namespace dplab {

enum class Direction : uint8_t { kToMechanism, kToAdversary };

// The adversary-side view of one interaction: every message exchanged, in
// order, starting with the adversary's first message. The initiating empty
// message is not part of the view.
struct Transcript {
  uint64_t seed = 0;
  std::vector<std::pair<Direction, Message>> messages;

  void Push(Direction d, Message m) {
    messages.emplace_back(d, std::move(m));
  }

  // Canonical Value encoding, usable as a PMF outcome key. Ignores the seed:
  // two transcripts with equal message sequences are the same view.
  Value Key() const;

  // Messages sent by the mechanism side only (the answer sequence).
  std::vector<Message> Answers() const;

  std::string ToString() const;
};

}  // namespace dplab

#endif  // DPLAB_TRANSCRIPT_H_
