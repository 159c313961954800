#ifndef DPLAB_IPM_H_
#define DPLAB_IPM_H_

#include <memory>
#include <string>
#include <vector>

#include "dplab/message.h"
#include "dplab/rng.h"

namespace dplab {

// Which peer of a post-processor a message came from or goes to. Left faces
// the adversary (or the next post-processor up the chain); Right faces the
// wrapped mechanism.
enum class Side : uint8_t { kLeft, kRight };

class Ipm;
using IpmPtr = std::unique_ptr<Ipm>;

struct IpmBranch {
  Rational prob;
  Side out_side;
  Message message;
  IpmPtr next;
};

// A stateful relay standing between two parties. On each input (side,
// message) it emits one output (side, message). Deterministic relays
// enumerate a single branch; randomized ones enumerate their full law.
class Ipm {
 public:
  virtual ~Ipm() = default;
  virtual IpmPtr Clone() const = 0;
  virtual bool SupportsEnumeration() const { return true; }
  virtual std::vector<IpmBranch> EnumerateStep(Side in_side,
                                               const Message& input) const = 0;
  virtual std::string DebugName() const { return "ipm"; }

  // Declared message-space tags for the two faces; "universal" matches any.
  virtual std::string LeftSpaceId() const { return "universal"; }
  virtual std::string RightSpaceId() const { return "universal"; }
};

struct IpmStepResult {
  Side out_side;
  Message message;
};

class IpmHandle {
 public:
  IpmHandle() = default;
  explicit IpmHandle(IpmPtr impl) : impl_(std::move(impl)) {}

  IpmHandle(const IpmHandle& o) : impl_(o.impl_ ? o.impl_->Clone() : nullptr) {}
  IpmHandle& operator=(const IpmHandle& o) {
    if (this != &o) impl_ = o.impl_ ? o.impl_->Clone() : nullptr;
    return *this;
  }
  IpmHandle(IpmHandle&&) = default;
  IpmHandle& operator=(IpmHandle&&) = default;

  bool Valid() const { return impl_ != nullptr; }
  bool SupportsEnumeration() const { return impl_->SupportsEnumeration(); }

  std::vector<IpmBranch> EnumerateStep(Side in_side,
                                       const Message& input) const {
    return impl_->EnumerateStep(in_side, input);
  }

  IpmStepResult Step(Side in_side, const Message& input, Rng& rng);

  const Ipm& impl() const { return *impl_; }

 private:
  IpmPtr impl_;
};

// Forwards every left message right and every right message left, unchanged.
class IdentityIpm final : public Ipm {
 public:
  IpmPtr Clone() const override { return std::make_unique<IdentityIpm>(); }
  std::vector<IpmBranch> EnumerateStep(Side in_side,
                                       const Message& input) const override {
    std::vector<IpmBranch> out;
    out.push_back({Rational(1),
                   in_side == Side::kLeft ? Side::kRight : Side::kLeft, input,
                   std::make_unique<IdentityIpm>()});
    return out;
  }
  std::string DebugName() const override { return "identity"; }
};

inline IpmHandle MakeIdentityIpm() {
  return IpmHandle(std::make_unique<IdentityIpm>());
}

}  // namespace dplab

#endif  // DPLAB_IPM_H_
