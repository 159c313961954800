#include "dplab/mechanisms/sparse_vector.h"

#include <optional>
#include <stdexcept>
#include <utility>

namespace dplab {

namespace {

class SvtMechanism final : public Mechanism {
 public:
  SvtMechanism(double epsilon_internal, QueryFn q, std::vector<int64_t> h0,
               NoiseSource noise)
      : q_(std::move(q)),
        h_(std::move(h0)),
        tau_scale_(1 / epsilon_internal),
        step_scale_(2 / epsilon_internal),
        noise_(std::move(noise)) {
    if (!(epsilon_internal > 0)) {
      throw std::invalid_argument("MakeSvt: epsilon must be positive");
    }
    if (h_.empty()) {
      throw std::invalid_argument("MakeSvt: h0 must be nonempty");
    }
    if (noise_.IsDeterministic()) {
      tau_ = noise_.PeekLapInt(tau_scale_);
      noise_ = noise_.Advanced();
    }
  }

  MechanismPtr Clone() const override {
    return std::make_unique<SvtMechanism>(*this);
  }

  bool SupportsEnumeration() const override {
    return noise_.IsDeterministic();
  }

  std::vector<StepBranch> EnumerateStep(const Message& input) const override {
    std::vector<StepBranch> out;
    std::vector<int64_t> x;
    Rational thresh;
    if (!ParseInput(input, &x, &thresh)) {
      out.push_back(HaltingBranch(Rational(1), Message::Halt()));
      return out;
    }
    auto next = std::make_unique<SvtMechanism>(*this);
    const int64_t draw = next->noise_.PeekLapInt(step_scale_);
    next->noise_ = next->noise_.Advanced();
    const bool above = next->Accumulate(x, draw, thresh);
    if (above) {
      out.push_back(
          HaltingBranch(Rational(1), Message::Answer(Value(Flag::kTop))));
    } else {
      out.push_back({Rational(1), Message::Answer(Value(Flag::kBottom)),
                     std::move(next)});
    }
    return out;
  }

  bool HasNativeSampler() const override { return !noise_.IsDeterministic(); }

  Message SampleStep(const Message& input, Rng& rng) override {
    if (halted_) return Message::Halt();
    std::vector<int64_t> x;
    Rational thresh;
    if (!ParseInput(input, &x, &thresh)) {
      halted_ = true;
      return Message::Halt();
    }
    if (!tau_.has_value()) tau_ = noise_.LapInt(tau_scale_, rng);
    const bool above = Accumulate(x, noise_.LapInt(step_scale_, rng), thresh);
    if (above) {
      halted_ = true;
      return Message::Answer(Value(Flag::kTop));
    }
    return Message::Answer(Value(Flag::kBottom));
  }

  std::string DebugName() const override { return "svt"; }
  std::string SpaceId() const override { return "svt"; }

 private:
  bool ParseInput(const Message& input, std::vector<int64_t>* x,
                  Rational* thresh) const {
    if (halted_ || input.kind != MessageKind::kQuery ||
        !input.payload.IsList()) {
      return false;
    }
    const ValueList& list = input.payload.AsList();
    if (list.size() != 2 || !list[0].IsList()) return false;
    const ValueList& xs = list[0].AsList();
    if (xs.size() != h_.size()) return false;
    for (const Value& v : xs) {
      if (!v.IsInt()) return false;
      x->push_back(v.AsInt());
    }
    if (list[1].IsRational()) {
      *thresh = list[1].AsRational();
    } else if (list[1].IsInt()) {
      *thresh = Rational(list[1].AsInt());
    } else {
      return false;
    }
    return true;
  }

  // Applies the increment and reports whether the noisy query value clears
  // the perturbed threshold. tau_ is set by this point on every path.
  bool Accumulate(const std::vector<int64_t>& x, int64_t draw,
                  const Rational& thresh) {
    for (size_t k = 0; k < h_.size(); ++k) h_[k] += x[k];
    const Rational lhs(q_.eval(h_) + draw);
    return lhs > thresh + Rational(*tau_);
  }

  QueryFn q_;
  std::vector<int64_t> h_;
  double tau_scale_;
  double step_scale_;
  NoiseSource noise_;
  std::optional<int64_t> tau_;
  bool halted_ = false;
};

}  // namespace

MechanismHandle MakeSvt(double epsilon_internal, QueryFn q,
                        std::vector<int64_t> h0, NoiseSource noise) {
  return MechanismHandle(std::make_unique<SvtMechanism>(
      epsilon_internal, std::move(q), std::move(h0), std::move(noise)));
}

}  // namespace dplab
