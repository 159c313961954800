#include "dplab/mechanisms/ext_con_comp.h"

#include <utility>
#include <vector>

namespace dplab {

namespace {

class ExtConCompMechanism final : public Mechanism {
 public:
  explicit ExtConCompMechanism(ChildFactory factory)
      : factory_(std::move(factory)) {}

  MechanismPtr Clone() const override {
    return std::make_unique<ExtConCompMechanism>(*this);
  }

  bool SupportsEnumeration() const override {
    for (const MechanismHandle& child : children_) {
      if (!child.SupportsEnumeration()) return false;
    }
    return true;
  }

  std::vector<StepBranch> EnumerateStep(const Message& input) const override {
    std::vector<StepBranch> out;
    if (input.kind == MessageKind::kCreationQuery &&
        input.payload.IsCreation()) {
      auto next = std::make_unique<ExtConCompMechanism>(*this);
      next->children_.push_back(factory_(*input.payload.AsCreation()));
      out.push_back({Rational(1), Message::Ack(Value(Flag::kTop)),
                     std::move(next)});
      return out;
    }
    size_t index = 0;
    const Value* q = RouteQuery(input, &index);
    if (q == nullptr) {
      out.push_back(HaltingBranch(Rational(1), Message::Halt()));
      return out;
    }
    for (StepBranch& b : children_[index].EnumerateStep(Message::Query(*q))) {
      if (b.answer.IsHalt()) {
        out.push_back(HaltingBranch(std::move(b.prob), Message::Halt()));
        continue;
      }
      auto next = std::make_unique<ExtConCompMechanism>(*this);
      next->children_[index] = MechanismHandle(std::move(b.next));
      out.push_back({std::move(b.prob), std::move(b.answer), std::move(next)});
    }
    return out;
  }

  bool HasNativeSampler() const override { return true; }

  Message SampleStep(const Message& input, Rng& rng) override {
    if (halted_) return Message::Halt();
    if (input.kind == MessageKind::kCreationQuery &&
        input.payload.IsCreation()) {
      children_.push_back(factory_(*input.payload.AsCreation()));
      return Message::Ack(Value(Flag::kTop));
    }
    size_t index = 0;
    const Value* q = RouteQuery(input, &index);
    if (q == nullptr) {
      halted_ = true;
      return Message::Halt();
    }
    Message answer = children_[index].Step(Message::Query(*q), rng);
    if (answer.IsHalt()) halted_ = true;
    return answer;
  }

  std::string DebugName() const override { return "ext_con_comp"; }

 private:
  // Valid routed queries have shape Query([q, i]) with 1 <= i <= #children.
  const Value* RouteQuery(const Message& input, size_t* index) const {
    if (halted_ || input.kind != MessageKind::kQuery ||
        !input.payload.IsList()) {
      return nullptr;
    }
    const ValueList& list = input.payload.AsList();
    if (list.size() != 2 || !list[1].IsInt()) return nullptr;
    const int64_t i = list[1].AsInt();
    if (i < 1 || static_cast<size_t>(i) > children_.size()) return nullptr;
    *index = static_cast<size_t>(i) - 1;
    return &list[0];
  }

  ChildFactory factory_;
  std::vector<MechanismHandle> children_;
  bool halted_ = false;
};

}  // namespace

MechanismHandle MakeExtConComp(ChildFactory factory) {
  return MechanismHandle(
      std::make_unique<ExtConCompMechanism>(std::move(factory)));
}

}  // namespace dplab
