#include "dplab/compose.h"

#include <utility>

namespace dplab {

std::vector<StepBranch> Mechanism::EnumerateStep(const Message&) const {
  throw std::logic_error(DebugName() + ": enumeration not supported");
}

Message Mechanism::SampleStep(const Message&, Rng&) {
  throw std::logic_error(DebugName() + ": no native sampler");
}

Message MechanismHandle::Step(const Message& input, Rng& rng) {
  if (impl_->HasNativeSampler()) return impl_->SampleStep(input, rng);
  std::vector<StepBranch> branches = impl_->EnumerateStep(input);
  std::vector<Rational> probs;
  probs.reserve(branches.size());
  for (const auto& b : branches) probs.push_back(b.prob);
  size_t i = rng.SampleIndex(probs);
  Message answer = std::move(branches[i].answer);
  impl_ = std::move(branches[i].next);
  return answer;
}

IpmStepResult IpmHandle::Step(Side in_side, const Message& input, Rng& rng) {
  std::vector<IpmBranch> branches = impl_->EnumerateStep(in_side, input);
  std::vector<Rational> probs;
  probs.reserve(branches.size());
  for (const auto& b : branches) probs.push_back(b.prob);
  size_t i = rng.SampleIndex(probs);
  IpmStepResult out{branches[i].out_side, std::move(branches[i].message)};
  impl_ = std::move(branches[i].next);
  return out;
}

namespace {

void CheckCompatible(const std::string& a, const std::string& b,
                     const char* where) {
  if (a != "universal" && b != "universal" && a != b) {
    throw std::invalid_argument(std::string(where) + ": message spaces '" + a +
                                "' and '" + b + "' do not match");
  }
}

// ipm ∘* mech as a single mechanism.
class ComposedMechanism final : public Mechanism {
 public:
  ComposedMechanism(IpmHandle ipm, MechanismHandle mech, int64_t loop_bound)
      : ipm_(std::move(ipm)), mech_(std::move(mech)), bound_(loop_bound) {}

  MechanismPtr Clone() const override {
    return std::make_unique<ComposedMechanism>(*this);
  }

  bool SupportsEnumeration() const override {
    return halted_ ||
           (ipm_.SupportsEnumeration() && mech_.SupportsEnumeration());
  }

  std::vector<StepBranch> EnumerateStep(const Message& input) const override {
    std::vector<StepBranch> leaves;
    if (halted_) {
      leaves.push_back(HaltingBranch(Rational(1), Message::Halt()));
      return leaves;
    }
    Expand(ipm_.impl(), mech_.impl(), Side::kLeft, input, Rational(1), 0,
           &leaves);
    return leaves;
  }

  bool HasNativeSampler() const override { return true; }

  Message SampleStep(const Message& input, Rng& rng) override {
    if (halted_) return Message::Halt();
    Side side = Side::kLeft;
    Message msg = input;
    for (int64_t trips = 0; trips <= bound_; ++trips) {
      IpmStepResult r = ipm_.Step(side, msg, rng);
      if (r.out_side == Side::kLeft) {
        if (r.message.IsHalt()) halted_ = true;
        return r.message;
      }
      if (r.message.IsHalt()) {
        halted_ = true;
        return Message::Halt();
      }
      Message answer = mech_.Step(r.message, rng);
      if (answer.IsHalt()) {
        halted_ = true;
        return Message::Halt();
      }
      side = Side::kRight;
      msg = std::move(answer);
    }
    throw LoopBoundExceeded("post-processing loop did not terminate", bound_);
  }

  std::string DebugName() const override { return "composed"; }

 private:
  void Expand(const Ipm& ipm, const Mechanism& mech, Side side,
              const Message& msg, const Rational& prob, int64_t trips,
              std::vector<StepBranch>* out) const {
    if (trips > bound_) {
      throw LoopBoundExceeded("post-processing loop did not terminate",
                              trips);
    }
    for (const IpmBranch& ib : ipm.EnumerateStep(side, msg)) {
      const Rational p1 = prob * ib.prob;
      if (ib.out_side == Side::kLeft) {
        MechanismPtr next =
            ib.message.IsHalt()
                ? MakeHalted()
                : std::make_unique<ComposedMechanism>(
                      IpmHandle(ib.next->Clone()),
                      MechanismHandle(mech.Clone()), bound_);
        out->push_back({p1, ib.message, std::move(next)});
        continue;
      }
      if (ib.message.IsHalt()) {
        out->push_back(HaltingBranch(p1, Message::Halt()));
        continue;
      }
      for (const StepBranch& mb : mech.EnumerateStep(ib.message)) {
        const Rational p2 = p1 * mb.prob;
        if (mb.answer.IsHalt()) {
          out->push_back(HaltingBranch(p2, Message::Halt()));
          continue;
        }
        Expand(*ib.next, *mb.next, Side::kRight, mb.answer, p2, trips + 1,
               out);
      }
    }
  }

  IpmHandle ipm_;
  MechanismHandle mech_;
  int64_t bound_;
  bool halted_ = false;
};

// left ∘* right as a single relay.
class ChainedIpm final : public Ipm {
 public:
  ChainedIpm(IpmHandle left, IpmHandle right, int64_t loop_bound)
      : left_(std::move(left)), right_(std::move(right)), bound_(loop_bound) {}

  IpmPtr Clone() const override { return std::make_unique<ChainedIpm>(*this); }

  bool SupportsEnumeration() const override {
    return left_.SupportsEnumeration() && right_.SupportsEnumeration();
  }

  std::vector<IpmBranch> EnumerateStep(Side in_side,
                                       const Message& input) const override {
    std::vector<IpmBranch> leaves;
    Expand(left_.impl(), right_.impl(), in_side == Side::kLeft, in_side, input,
           Rational(1), 0, &leaves);
    return leaves;
  }

  std::string LeftSpaceId() const override { return left_.impl().LeftSpaceId(); }
  std::string RightSpaceId() const override {
    return right_.impl().RightSpaceId();
  }
  std::string DebugName() const override { return "chained"; }

 private:
  // A message entering from the chain's left is processed by `left` (as a
  // left input); from the right, by `right` (as a right input). Internal
  // handoffs flip the side tag: what `left` sends right arrives at `right`
  // as a left input, and what `right` sends left arrives at `left` as a
  // right input. The receiving party and the tag therefore disagree on
  // internal hops, so both travel explicitly. The loop ends when a message
  // exits either end.
  void Expand(const Ipm& left, const Ipm& right, bool process_left, Side tag,
              const Message& msg, const Rational& prob, int64_t trips,
              std::vector<IpmBranch>* out) const {
    if (trips > bound_) {
      throw LoopBoundExceeded("chain relay did not terminate", trips);
    }
    const Ipm& active = process_left ? left : right;
    for (const IpmBranch& b : active.EnumerateStep(tag, msg)) {
      const Rational p = prob * b.prob;
      const bool exits = process_left ? (b.out_side == Side::kLeft)
                                      : (b.out_side == Side::kRight);
      if (exits) {
        const Ipm& l2 = process_left ? *b.next : left;
        const Ipm& r2 = process_left ? right : *b.next;
        out->push_back({p, b.out_side, b.message,
                        std::make_unique<ChainedIpm>(IpmHandle(l2.Clone()),
                                                     IpmHandle(r2.Clone()),
                                                     bound_)});
        continue;
      }
      if (process_left) {
        Expand(*b.next, right, false, Side::kLeft, b.message, p, trips + 1,
               out);
      } else {
        Expand(left, *b.next, true, Side::kRight, b.message, p, trips + 1,
               out);
      }
    }
  }

  IpmHandle left_;
  IpmHandle right_;
  int64_t bound_;
};

}  // namespace

MechanismHandle ComposePost(IpmHandle ipm, MechanismHandle mech,
                            int64_t loop_bound) {
  CheckCompatible(ipm.impl().RightSpaceId(), mech.impl().SpaceId(),
                  "ComposePost");
  return MechanismHandle(std::make_unique<ComposedMechanism>(
      std::move(ipm), std::move(mech), loop_bound));
}

IpmHandle Chain(IpmHandle left, IpmHandle right, int64_t loop_bound) {
  CheckCompatible(left.impl().RightSpaceId(), right.impl().LeftSpaceId(),
                  "Chain");
  return IpmHandle(std::make_unique<ChainedIpm>(std::move(left),
                                                std::move(right), loop_bound));
}

Transcript RunInteraction(MechanismHandle adversary, MechanismHandle mech,
                          uint64_t seed, int64_t max_rounds) {
  Transcript t;
  t.seed = seed;
  const Rng base(seed);
  Message answer = Message::Empty();
  for (int64_t round = 0; round < max_rounds; ++round) {
    Rng adv_rng = base.Split2(static_cast<uint64_t>(round), 0);
    Message query = adversary.Step(answer, adv_rng);
    t.Push(Direction::kToMechanism, query);
    if (query.IsHalt()) return t;
    Rng mech_rng = base.Split2(static_cast<uint64_t>(round), 1);
    answer = mech.Step(query, mech_rng);
    t.Push(Direction::kToAdversary, answer);
    if (answer.IsHalt()) return t;
  }
  throw InteractionError("round bound exceeded", std::move(t));
}

}  // namespace dplab
