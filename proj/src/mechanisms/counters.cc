#include "dplab/mechanisms/counters.h"

#include <bit>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dplab {

namespace {

int CeilLog2(int64_t t) {
  return static_cast<int>(std::bit_width(static_cast<uint64_t>(t - 1)));
}

// Tree state of one counter. At step t the node at the lowest set bit of t
// completes: it absorbs the exact partial sums below it plus the new
// increment, gets one fresh noisy copy, and the estimate is the sum of noisy
// nodes over the set bits of t.
struct CounterCore {
  explicit CounterCore(int64_t T)
      : alpha(std::bit_width(static_cast<uint64_t>(T)), 0),
        noisy(alpha.size(), 0) {}

  int64_t Step(int64_t x, int64_t draw, int64_t t) {
    const int i = std::countr_zero(static_cast<uint64_t>(t));
    int64_t block = x;
    for (int j = 0; j < i; ++j) {
      block += alpha[j];
      alpha[j] = 0;
      noisy[j] = 0;
    }
    alpha[i] = block;
    noisy[i] = block + draw;
    int64_t estimate = 0;
    for (size_t j = 0; j < noisy.size(); ++j) {
      if ((t >> j) & 1) estimate += noisy[j];
    }
    return estimate;
  }

  std::vector<int64_t> alpha;
  std::vector<int64_t> noisy;
};

// Shared wrapper: d cores advanced in lockstep, one draw per core per step.
// d = 1 with scalar payloads is the plain binary counter.
class TreeCounterMechanism final : public Mechanism {
 public:
  TreeCounterMechanism(double epsilon, int d, int64_t T, NoiseSource noise,
                       bool vector_io)
      : cores_(static_cast<size_t>(d), CounterCore(T)),
        scale_(d * std::max(1, CeilLog2(T)) / epsilon),
        horizon_(T),
        noise_(std::move(noise)),
        vector_io_(vector_io) {
    if (!(epsilon > 0)) {
      throw std::invalid_argument("counter: epsilon must be positive");
    }
    if (d < 1) throw std::invalid_argument("counter: d must be at least 1");
    if (T < 1) throw std::invalid_argument("counter: T must be at least 1");
  }

  MechanismPtr Clone() const override {
    return std::make_unique<TreeCounterMechanism>(*this);
  }

  bool SupportsEnumeration() const override {
    return noise_.IsDeterministic();
  }

  std::vector<StepBranch> EnumerateStep(const Message& input) const override {
    std::vector<StepBranch> out;
    std::vector<int64_t> xs;
    if (!ParseInput(input, &xs)) {
      out.push_back(HaltingBranch(Rational(1), Message::Halt()));
      return out;
    }
    auto next = std::make_unique<TreeCounterMechanism>(*this);
    std::vector<int64_t> draws(cores_.size());
    for (size_t k = 0; k < cores_.size(); ++k) {
      draws[k] = next->noise_.PeekLapInt(scale_);
      next->noise_ = next->noise_.Advanced();
    }
    out.push_back({Rational(1), Message::Answer(next->Advance(xs, draws)),
                   std::move(next)});
    return out;
  }

  bool HasNativeSampler() const override { return !noise_.IsDeterministic(); }

  Message SampleStep(const Message& input, Rng& rng) override {
    std::vector<int64_t> xs;
    if (!ParseInput(input, &xs)) {
      t_ = horizon_;  // absorb
      return Message::Halt();
    }
    std::vector<int64_t> draws(cores_.size());
    for (size_t k = 0; k < cores_.size(); ++k) {
      draws[k] = noise_.LapInt(scale_, rng);
    }
    return Message::Answer(Advance(xs, draws));
  }

  std::string DebugName() const override {
    return vector_io_ ? "d_counter" : "binary_counter";
  }
  std::string SpaceId() const override {
    return vector_io_ ? "int_vector" : "int";
  }

 private:
  bool ParseInput(const Message& input, std::vector<int64_t>* xs) const {
    if (t_ >= horizon_ || input.kind != MessageKind::kQuery) return false;
    if (!vector_io_) {
      if (!input.payload.IsInt()) return false;
      xs->push_back(input.payload.AsInt());
      return true;
    }
    if (!input.payload.IsList()) return false;
    const ValueList& list = input.payload.AsList();
    if (list.size() != cores_.size()) return false;
    for (const Value& v : list) {
      if (!v.IsInt()) return false;
      xs->push_back(v.AsInt());
    }
    return true;
  }

  Value Advance(const std::vector<int64_t>& xs,
                const std::vector<int64_t>& draws) {
    ++t_;
    if (!vector_io_) return Value(cores_[0].Step(xs[0], draws[0], t_));
    ValueList answer;
    answer.reserve(cores_.size());
    for (size_t k = 0; k < cores_.size(); ++k) {
      answer.emplace_back(cores_[k].Step(xs[k], draws[k], t_));
    }
    return Value(std::move(answer));
  }

  std::vector<CounterCore> cores_;
  double scale_;
  int64_t horizon_;
  int64_t t_ = 0;
  NoiseSource noise_;
  bool vector_io_;
};

}  // namespace

MechanismHandle MakeBinaryCounter(double epsilon, int64_t T,
                                  NoiseSource noise) {
  return MechanismHandle(std::make_unique<TreeCounterMechanism>(
      epsilon, 1, T, std::move(noise), /*vector_io=*/false));
}

MechanismHandle MakeDCounter(double epsilon, int d, int64_t T,
                             NoiseSource noise) {
  return MechanismHandle(std::make_unique<TreeCounterMechanism>(
      epsilon, d, T, std::move(noise), /*vector_io=*/true));
}

}  // namespace dplab
