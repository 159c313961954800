#ifndef DPLAB_MESSAGE_H_
#define DPLAB_MESSAGE_H_

#include <string>
#include <utility>

#include "dplab/value.h"

namespace dplab {

enum class MessageKind : uint8_t {
  kCreationQuery,  // payload: CreationQueryPtr
  kQuery,          // payload: any single query value
  kQueryPair,      // payload: list of exactly two values
  kAnswer,         // payload: any answer value
  kAck,            // payload: acknowledgement symbol
  kHalt,           // payload: unit; terminal in both directions
};

// One message on the wire. Halt is absorbing: once either party emits it, the
// interaction is over and any further step yields Halt again.
struct Message {
  MessageKind kind = MessageKind::kHalt;
  Value payload;

  static Message Creation(CreationQuery cq) {
    return {MessageKind::kCreationQuery, MakeCreationValue(std::move(cq))};
  }
  static Message Query(Value v) { return {MessageKind::kQuery, std::move(v)}; }
  static Message QueryPair(Value m0, Value m1) {
    return {MessageKind::kQueryPair, Value::Pair(std::move(m0), std::move(m1))};
  }
  static Message Answer(Value v) {
    return {MessageKind::kAnswer, std::move(v)};
  }
  static Message Ack(Value v) { return {MessageKind::kAck, std::move(v)}; }
  static Message Halt() { return {MessageKind::kHalt, Value::Unit()}; }
  // The empty message that initiates an interaction.
  static Message Empty() { return {MessageKind::kQuery, Value::Unit()}; }

  bool IsHalt() const { return kind == MessageKind::kHalt; }
  bool IsPair() const {
    return kind == MessageKind::kQueryPair && payload.IsList() &&
           payload.AsList().size() == 2;
  }

  bool operator==(const Message& o) const {
    return kind == o.kind && payload == o.payload;
  }
  bool operator!=(const Message& o) const { return !(*this == o); }
  bool operator<(const Message& o) const {
    if (kind != o.kind) return kind < o.kind;
    return payload < o.payload;
  }

  std::string ToString() const;
};

}  // namespace dplab

#endif  // DPLAB_MESSAGE_H_
