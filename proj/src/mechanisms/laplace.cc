#include "dplab/mechanisms/laplace.h"

#include <stdexcept>
#include <utility>

namespace dplab {

namespace {

class LaplaceIntMechanism final : public Mechanism {
 public:
  LaplaceIntMechanism(double epsilon, NoiseSource noise, int sensitivity)
      : scale_(sensitivity / epsilon), noise_(std::move(noise)) {
    if (!(epsilon > 0)) {
      throw std::invalid_argument("MakeLaplaceInt: epsilon must be positive");
    }
    if (sensitivity < 1) {
      throw std::invalid_argument(
          "MakeLaplaceInt: sensitivity must be at least 1");
    }
  }

  MechanismPtr Clone() const override {
    return std::make_unique<LaplaceIntMechanism>(*this);
  }

  bool SupportsEnumeration() const override {
    return noise_.IsDeterministic();
  }

  std::vector<StepBranch> EnumerateStep(const Message& input) const override {
    std::vector<StepBranch> out;
    if (!Accepts(input)) {
      out.push_back(HaltingBranch(Rational(1), Message::Halt()));
      return out;
    }
    const int64_t draw = noise_.PeekLapInt(scale_);
    out.push_back(HaltingBranch(
        Rational(1), Message::Answer(Value(input.payload.AsInt() + draw))));
    return out;
  }

  bool HasNativeSampler() const override { return !noise_.IsDeterministic(); }

  Message SampleStep(const Message& input, Rng& rng) override {
    if (answered_) return Message::Halt();
    if (!Accepts(input)) {
      answered_ = true;
      return Message::Halt();
    }
    answered_ = true;
    return Message::Answer(Value(input.payload.AsInt() + noise_.LapInt(scale_, rng)));
  }

  std::string DebugName() const override { return "laplace_int"; }
  std::string SpaceId() const override { return "int"; }

 private:
  static bool Accepts(const Message& input) {
    return input.kind == MessageKind::kQuery && input.payload.IsInt();
  }

  double scale_;
  NoiseSource noise_;
  bool answered_ = false;
};

}  // namespace

MechanismHandle MakeLaplaceInt(double epsilon, NoiseSource noise,
                               int sensitivity) {
  return MechanismHandle(std::make_unique<LaplaceIntMechanism>(
      epsilon, std::move(noise), sensitivity));
}

}  // namespace dplab
