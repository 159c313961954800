#ifndef DPLAB_MECHANISM_H_
#define DPLAB_MECHANISM_H_

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "dplab/message.h"
#include "dplab/rng.h"

namespace dplab {

class Mechanism;
using MechanismPtr = std::unique_ptr<Mechanism>;

// One enumerated transition: with probability `prob`, answer `answer` and
// continue as `next`. Probabilities over all branches of a step sum to 1.
struct StepBranch {
  Rational prob;
  Message answer;
  MechanismPtr next;
};

// A stateful randomized transducer. Implementations provide either an exact
// branch enumeration (EnumerateStep), a native sampler (SampleStep), or both.
// The enumeration contract: branches carry successor objects, so stepping
// never mutates the enumerated instance. Mechanisms double as adversaries;
// an adversary is just the mechanism that speaks first.
class Mechanism {
 public:
  virtual ~Mechanism() = default;

  virtual MechanismPtr Clone() const = 0;

  virtual bool SupportsEnumeration() const { return true; }

  // All transitions out of the current state on `input`.
  virtual std::vector<StepBranch> EnumerateStep(const Message& input) const;

  // In-place sampling step for mechanisms whose branch set is impractical to
  // enumerate (seeded noise over large supports). Default defers to
  // enumeration via the handle; only overridden together with
  // HasNativeSampler() = true.
  virtual bool HasNativeSampler() const { return false; }
  virtual Message SampleStep(const Message& input, Rng& rng);

  virtual std::string DebugName() const { return "mechanism"; }

  // Declared message-space tag, used for construction-time compatibility
  // checks in composition. "universal" is compatible with everything.
  virtual std::string SpaceId() const { return "universal"; }
};

// Terminal state: answers Halt forever. Mechanisms transition here when they
// stop; the absorption invariant lives in one place.
class HaltedMechanism final : public Mechanism {
 public:
  MechanismPtr Clone() const override {
    return std::make_unique<HaltedMechanism>();
  }
  std::vector<StepBranch> EnumerateStep(const Message&) const override {
    std::vector<StepBranch> out;
    out.push_back({Rational(1), Message::Halt(),
                   std::make_unique<HaltedMechanism>()});
    return out;
  }
  std::string DebugName() const override { return "halted"; }
};

inline MechanismPtr MakeHalted() { return std::make_unique<HaltedMechanism>(); }

// Convenience for implementations: a branch that answers `answer` and halts.
inline StepBranch HaltingBranch(Rational prob, Message answer) {
  return {std::move(prob), std::move(answer), MakeHalted()};
}

// Value-semantics wrapper owning a Mechanism. Step() advances the state:
// natively when the implementation samples in place, otherwise by sampling a
// branch from the enumeration and adopting its successor.
class MechanismHandle {
 public:
  MechanismHandle() = default;
  explicit MechanismHandle(MechanismPtr impl) : impl_(std::move(impl)) {}

  MechanismHandle(const MechanismHandle& o)
      : impl_(o.impl_ ? o.impl_->Clone() : nullptr) {}
  MechanismHandle& operator=(const MechanismHandle& o) {
    if (this != &o) impl_ = o.impl_ ? o.impl_->Clone() : nullptr;
    return *this;
  }
  MechanismHandle(MechanismHandle&&) = default;
  MechanismHandle& operator=(MechanismHandle&&) = default;

  bool Valid() const { return impl_ != nullptr; }
  bool SupportsEnumeration() const { return impl_->SupportsEnumeration(); }

  std::vector<StepBranch> EnumerateStep(const Message& input) const {
    return impl_->EnumerateStep(input);
  }

  Message Step(const Message& input, Rng& rng);

  const Mechanism& impl() const { return *impl_; }
  Mechanism& impl() { return *impl_; }

 private:
  MechanismPtr impl_;
};

}  // namespace dplab

#endif  // DPLAB_MECHANISM_H_
