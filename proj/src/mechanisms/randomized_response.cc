#include "dplab/mechanisms/randomized_response.h"

#include <utility>

namespace dplab {

namespace {

// Masses of the three outcomes on input b, as exact rationals.
struct RrMasses {
  Rational exposed;        // (Exposed, b)
  Rational private_same;   // (Private, b)
  Rational private_flip;   // (Private, 1-b)
};

RrMasses ComputeMasses(const PrivacyParams& p) {
  const Rational keep = Rational(1) - p.delta_exact;
  const Rational denom = Rational(1) + p.rho;
  return {p.delta_exact, keep * p.rho / denom, keep / denom};
}

class RrMechanism final : public Mechanism {
 public:
  explicit RrMechanism(PrivacyParams params) : params_(std::move(params)) {}

  MechanismPtr Clone() const override {
    return std::make_unique<RrMechanism>(*this);
  }

  std::vector<StepBranch> EnumerateStep(const Message& input) const override {
    std::vector<StepBranch> out;
    if (input.kind != MessageKind::kQuery || !input.payload.IsBit()) {
      out.push_back(HaltingBranch(Rational(1), Message::Halt()));
      return out;
    }
    const int b = static_cast<int>(input.payload.AsInt());
    const RrMasses m = ComputeMasses(params_);
    auto emit = [&](const Rational& prob, RrFlag flag, int bit) {
      if (prob == 0) return;
      out.push_back(HaltingBranch(
          prob, Message::Answer(RrOutcomeValue(flag, bit))));
    };
    emit(m.exposed, RrFlag::kExposed, b);
    emit(m.private_same, RrFlag::kPrivate, b);
    emit(m.private_flip, RrFlag::kPrivate, 1 - b);
    return out;
  }

  std::string DebugName() const override { return "rr"; }
  std::string SpaceId() const override { return "bit"; }

 private:
  PrivacyParams params_;
};

// Interactive variant. Phases: flag not yet drawn, flag drawn (bit pending),
// then halted. Only Query(0) advances a phase.
// Input-baked one-shot variant: the query payload is ignored, the outcome
// law is fixed by the stored bit.
class RrSourceMechanism final : public Mechanism {
 public:
  RrSourceMechanism(PrivacyParams params, int bit)
      : params_(std::move(params)), bit_(bit) {}

  MechanismPtr Clone() const override {
    return std::make_unique<RrSourceMechanism>(*this);
  }

  std::vector<StepBranch> EnumerateStep(const Message& input) const override {
    std::vector<StepBranch> out;
    if (input.kind != MessageKind::kQuery) {
      out.push_back(HaltingBranch(Rational(1), Message::Halt()));
      return out;
    }
    const DiscretePmf law = RrLaw(params_, bit_);
    for (const auto& [outcome, mass] : law.Entries()) {
      out.push_back(HaltingBranch(mass, Message::Answer(outcome)));
    }
    return out;
  }

  std::string DebugName() const override { return "rr_source"; }
  std::string SpaceId() const override { return "any"; }

 private:
  PrivacyParams params_;
  int bit_;
};

class IrrMechanism final : public Mechanism {
 public:
  IrrMechanism(PrivacyParams params, int bit)
      : params_(std::move(params)), bit_(bit) {}

  MechanismPtr Clone() const override {
    return std::make_unique<IrrMechanism>(*this);
  }

  std::vector<StepBranch> EnumerateStep(const Message& input) const override {
    std::vector<StepBranch> out;
    if (!(input == IrrQuery())) {
      out.push_back(HaltingBranch(Rational(1), Message::Halt()));
      return out;
    }
    if (!flag_drawn_) {
      const Rational keep = Rational(1) - params_.delta_exact;
      auto emit = [&](const Rational& prob, RrFlag flag) {
        if (prob == 0) return;
        auto next = std::make_unique<IrrMechanism>(*this);
        next->flag_drawn_ = true;
        next->flag_ = flag;
        out.push_back(
            {prob, Message::Answer(Value(flag)), std::move(next)});
      };
      emit(params_.delta_exact, RrFlag::kExposed);
      emit(keep, RrFlag::kPrivate);
      return out;
    }
    if (flag_ == RrFlag::kExposed) {
      out.push_back(HaltingBranch(Rational(1), Message::Answer(Value(bit_))));
      return out;
    }
    const Rational denom = Rational(1) + params_.rho;
    auto emit = [&](const Rational& prob, int bit) {
      if (prob == 0) return;
      out.push_back(HaltingBranch(prob, Message::Answer(Value(bit))));
    };
    emit(params_.rho / denom, bit_);
    emit(Rational(1) / denom, 1 - bit_);
    return out;
  }

  std::string DebugName() const override { return "irr"; }
  std::string SpaceId() const override { return "irr"; }

 private:
  PrivacyParams params_;
  int bit_;
  bool flag_drawn_ = false;
  RrFlag flag_ = RrFlag::kPrivate;
};

}  // namespace

Value RrOutcomeValue(RrFlag flag, int bit) {
  return Value::Pair(Value(flag), Value(bit));
}

DiscretePmf RrLaw(const PrivacyParams& params, int b) {
  const RrMasses m = ComputeMasses(params);
  DiscretePmf pmf;
  pmf.Add(RrOutcomeValue(RrFlag::kExposed, b), m.exposed);
  pmf.Add(RrOutcomeValue(RrFlag::kPrivate, b), m.private_same);
  pmf.Add(RrOutcomeValue(RrFlag::kPrivate, 1 - b), m.private_flip);
  return pmf;
}

MechanismHandle MakeRr(const PrivacyParams& params) {
  return MechanismHandle(std::make_unique<RrMechanism>(params));
}

MechanismHandle MakeIrr(const PrivacyParams& params, int bit) {
  if (bit != 0 && bit != 1) {
    throw std::invalid_argument("MakeIrr: bit must be 0 or 1");
  }
  return MechanismHandle(std::make_unique<IrrMechanism>(params, bit));
}

MechanismHandle MakeRrSource(const PrivacyParams& params, int input_bit) {
  if (input_bit != 0 && input_bit != 1) {
    throw std::invalid_argument("MakeRrSource: input_bit must be 0 or 1");
  }
  return MechanismHandle(
      std::make_unique<RrSourceMechanism>(params, input_bit));
}

}  // namespace dplab
