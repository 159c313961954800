#include "dplab/mechanisms/trip_reveal.h"

#include <stdexcept>

namespace dplab {

namespace {

class TripRevealMechanism final : public Mechanism {
 public:
  explicit TripRevealMechanism(Rational delta) : delta_(std::move(delta)) {}

  MechanismPtr Clone() const override {
    return std::make_unique<TripRevealMechanism>(*this);
  }

  std::vector<StepBranch> EnumerateStep(const Message& input) const override {
    std::vector<StepBranch> out;
    if (queries_ >= 2 || input.kind != MessageKind::kQuery ||
        !input.payload.IsBit()) {
      out.push_back(HaltingBranch(Rational(1), Message::Halt()));
      return out;
    }
    if (tripped_) {
      auto next = Successor(true);
      out.push_back({Rational(1), Message::Answer(input.payload),
                     std::move(next)});
      return out;
    }
    const Rational stay = Rational(1) - delta_;
    if (stay != 0) {
      out.push_back({stay, Message::Answer(Value(Flag::kTop)),
                     Successor(false)});
    }
    if (delta_ != 0) {
      out.push_back({delta_, Message::Answer(Value(Flag::kBottom)),
                     Successor(true)});
    }
    return out;
  }

  std::string DebugName() const override { return "m_delta"; }
  std::string SpaceId() const override { return "bit"; }

 private:
  MechanismPtr Successor(bool tripped) const {
    auto next = std::make_unique<TripRevealMechanism>(*this);
    next->tripped_ = tripped;
    next->queries_ = queries_ + 1;
    return next;
  }

  Rational delta_;
  bool tripped_ = false;
  int queries_ = 0;
};

}  // namespace

MechanismHandle MakeTripReveal(const Rational& delta) {
  if (delta < 0 || delta > 1) {
    throw std::invalid_argument("MakeTripReveal: delta must be in [0, 1]");
  }
  return MechanismHandle(std::make_unique<TripRevealMechanism>(delta));
}

}  // namespace dplab
