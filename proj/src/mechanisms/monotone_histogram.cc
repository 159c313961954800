#include "dplab/mechanisms/monotone_histogram.h"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "dplab/mechanisms/counters.h"
#include "dplab/mechanisms/laplace.h"
#include "dplab/mechanisms/sparse_vector.h"

namespace dplab {

namespace {

Value IntVectorValue(const std::vector<int64_t>& xs) {
  ValueList list;
  list.reserve(xs.size());
  for (int64_t x : xs) list.emplace_back(x);
  return Value(std::move(list));
}

std::vector<int64_t> ParseIntVector(const Value& v) {
  std::vector<int64_t> out;
  for (const Value& x : v.AsList()) out.push_back(x.AsInt());
  return out;
}

// Single-branch step for deterministic children; the handle adopts the
// successor so halting state propagates.
Message StepDeterministic(MechanismHandle* child, const Message& input) {
  std::vector<StepBranch> branches = child->EnumerateStep(input);
  if (branches.size() != 1) {
    throw std::logic_error("histogram child step is not deterministic");
  }
  *child = MechanismHandle(std::move(branches[0].next));
  return branches[0].answer;
}

NoiseSource ModeNoise(NoiseSource::Mode mode) {
  return mode == NoiseSource::Mode::kZero ? NoiseSource::Zero()
                                          : NoiseSource::Seeded();
}

}  // namespace

HistogramSchedule MakeSchedule(const std::string& gamma_id,
                               const std::string& xi_id, int d, double beta,
                               double epsilon) {
  HistogramSchedule s;
  s.gamma_id = gamma_id;
  s.xi_id = xi_id;
  if (gamma_id == "one") {
    s.gamma = [](int64_t, int64_t) { return Rational(1); };
  } else if (gamma_id == "two") {
    s.gamma = [](int64_t, int64_t) { return Rational(2); };
  } else if (gamma_id == "default") {
    if (!(epsilon > 0) || !(beta > 0) || d < 1) {
      throw std::invalid_argument("MakeSchedule: need epsilon, beta > 0");
    }
    s.gamma = [d, beta, epsilon](int64_t t, int64_t j) {
      const double l = std::log(static_cast<double>((j + 1) * d) / beta);
      return RationalFromDouble(
          6 * (d * (l * l) + std::log(static_cast<double>(t + 1))) / epsilon);
    };
  } else {
    throw std::invalid_argument("MakeSchedule: unknown gamma id " + gamma_id);
  }
  if (xi_id == "zero") {
    s.xi = [](int64_t, int64_t) { return Rational(0); };
  } else if (xi_id == "half") {
    s.xi = [gamma = s.gamma](int64_t t, int64_t j) { return gamma(t, j) / 2; };
  } else {
    throw std::invalid_argument("MakeSchedule: unknown xi id " + xi_id);
  }
  return s;
}

std::vector<CreationQuery> InstrumentedTrace::Creations() const {
  std::vector<CreationQuery> out;
  for (const TraceEvent& e : events) {
    if (e.kind == TraceEvent::Kind::kCreate) out.push_back(e.creation);
  }
  return out;
}

std::vector<Value> InstrumentedTrace::InputsFor(size_t child) const {
  std::vector<Value> out;
  for (const TraceEvent& e : events) {
    if (e.kind == TraceEvent::Kind::kCall && e.child == child) {
      out.push_back(e.input.payload);
    }
  }
  return out;
}

HistogramCore::HistogramCore(HistogramConfig config,
                             NoiseSource::Mode noise_mode)
    : config_(std::move(config)), noise_mode_(noise_mode) {
  if (config_.d < 1 || config_.T < 1) {
    throw std::invalid_argument("HistogramCore: need d >= 1, T >= 1");
  }
  h_.assign(static_cast<size_t>(config_.d), 0);
  c_.assign(static_cast<size_t>(config_.d), 0);
  out_ = config_.q.eval(h_);
  thresh_ = config_.schedule.gamma(1, 1);
  CreationQuery counter_cq;
  counter_cq.mech_id = "d_counter";
  counter_cq.init_state =
      Value::Pair(Value(int64_t{config_.d}), Value(config_.T));
  counter_cq.params =
      PrivacyParams::FromDouble(config_.epsilon / 3, config_.delta);
  counter_cq.vf_id = "neighbor:linf1";
  counter_child_ = CreateChild(std::move(counter_cq));
  svt_child_ = CreateChild(SvtCreation());
}

HistogramCore::HistogramCore(HistogramConfig config,
                             const InstrumentedTrace* decisions)
    : HistogramCore(std::move(config), NoiseSource::Mode::kZero) {
  replay_ = decisions;
}

CreationQuery HistogramCore::SvtCreation() const {
  CreationQuery cq;
  cq.mech_id = "svt";
  cq.init_state = Value(ValueList{
      Value(config_.q.id), IntVectorValue(h_),
      Value(RationalFromDouble(config_.epsilon / 6))});
  cq.params = PrivacyParams::FromDouble(config_.epsilon / 3, 0.0);
  cq.vf_id = "neighbor:event01";
  return cq;
}

size_t HistogramCore::CreateChild(CreationQuery cq) {
  const size_t index = trace_.Creations().size();
  if (replay_ == nullptr) {
    const NoiseSource noise = ModeNoise(noise_mode_);
    MechanismHandle child;
    if (cq.mech_id == "d_counter") {
      child = MakeDCounter(config_.epsilon / 3, config_.d, config_.T, noise);
    } else if (cq.mech_id == "svt") {
      child = MakeSvt(config_.epsilon / 6, config_.q, h_, noise);
    } else {
      child = MakeLaplaceInt(config_.epsilon / 3, noise);
    }
    children_.push_back(std::move(child));
  }
  TraceEvent e;
  e.kind = TraceEvent::Kind::kCreate;
  e.creation = std::move(cq);
  trace_.events.push_back(std::move(e));
  return index;
}

Message HistogramCore::CallChild(size_t child, Message input, Rng& rng) {
  Message answer;
  if (replay_ != nullptr) {
    while (replay_cursor_ < replay_->events.size() &&
           replay_->events[replay_cursor_].kind != TraceEvent::Kind::kCall) {
      ++replay_cursor_;
    }
    if (replay_cursor_ >= replay_->events.size()) {
      throw std::logic_error("histogram replay: decision trace exhausted");
    }
    answer = replay_->events[replay_cursor_++].answer;
  } else if (children_[child].SupportsEnumeration()) {
    answer = StepDeterministic(&children_[child], input);
  } else {
    answer = children_[child].Step(input, rng);
  }
  TraceEvent e;
  e.kind = TraceEvent::Kind::kCall;
  e.child = child;
  e.input = std::move(input);
  e.answer = answer;
  trace_.events.push_back(std::move(e));
  return answer;
}

int64_t HistogramCore::Update(const std::vector<int64_t>& x, Rng& rng) {
  if (x.size() != h_.size()) {
    throw std::invalid_argument("HistogramCore::Update: wrong dimension");
  }
  const auto& gamma = config_.schedule.gamma;
  t_ += 1;
  for (size_t k = 0; k < c_.size(); ++k) c_[k] += x[k];
  Message svt_answer =
      CallChild(svt_child_,
                Message::Query(Value::Pair(IntVectorValue(x), thresh_)), rng);
  if (svt_answer == Message::Answer(Value(Flag::kTop))) {
    Message count =
        CallChild(counter_child_, Message::Query(IntVectorValue(c_)), rng);
    h_ = ParseIntVector(count.payload);
    out_ = config_.q.eval(h_);
    svt_child_ = CreateChild(SvtCreation());
    c_.assign(c_.size(), 0);
    std::vector<int64_t> probe(h_.size());
    for (size_t k = 0; k < h_.size(); ++k) probe[k] = c_[k] + h_[k];
    CreationQuery lap_cq;
    lap_cq.mech_id = "laplace_int";
    lap_cq.init_state = Value::Unit();
    lap_cq.params = PrivacyParams::FromDouble(config_.epsilon / 3, 0.0);
    lap_cq.vf_id = "laplace_single";
    const size_t lap = CreateChild(std::move(lap_cq));
    Message lap_answer =
        CallChild(lap, Message::Query(Value(config_.q.eval(probe))), rng);
    if (Rational(lap_answer.payload.AsInt()) >
        thresh_ - config_.schedule.xi(t_, j_)) {
      thresh_ += gamma(t_, j_);
    }
    j_ += 1;
    thresh_ += -gamma(t_, j_ - 1) + gamma(t_, j_);
  }
  thresh_ += -gamma(t_, j_) + gamma(t_ + 1, j_);
  int64_t reported = out_;
  if (config_.expose_raw) {
    std::vector<int64_t> raw(h_.size());
    for (size_t k = 0; k < h_.size(); ++k) raw[k] = c_[k] + h_[k];
    reported = config_.q.eval(raw);
  }
  trace_.outputs.emplace_back(reported);
  return reported;
}

InstrumentedTrace RunHistogram(const HistogramConfig& config,
                               const std::vector<std::vector<int64_t>>& stream,
                               NoiseSource::Mode noise_mode, uint64_t seed) {
  HistogramCore core(config, noise_mode);
  Rng rng(seed);
  for (const auto& x : stream) core.Update(x, rng);
  return core.trace();
}

InstrumentedTrace RunHistogramReplay(
    const HistogramConfig& config,
    const std::vector<std::vector<int64_t>>& stream,
    const InstrumentedTrace& decisions) {
  HistogramCore core(config, &decisions);
  Rng rng(0);
  for (const auto& x : stream) core.Update(x, rng);
  return core.trace();
}

namespace {

class MonotoneHistogramMechanism final : public Mechanism {
 public:
  MonotoneHistogramMechanism(HistogramConfig config,
                             NoiseSource::Mode noise_mode)
      : core_(std::move(config), noise_mode),
        deterministic_(noise_mode != NoiseSource::Mode::kSeeded) {
    if (!core_.config().q.monotone ||
        !IsOneSensitive(core_.config().q, core_.config().d)) {
      throw std::invalid_argument(
          "MakeMonotoneHistogram: query must be monotone and 1-sensitive");
    }
  }

  MechanismPtr Clone() const override {
    return std::make_unique<MonotoneHistogramMechanism>(*this);
  }

  bool SupportsEnumeration() const override { return deterministic_; }

  std::vector<StepBranch> EnumerateStep(const Message& input) const override {
    std::vector<StepBranch> out;
    std::vector<int64_t> x;
    if (!deterministic_ || !ParseInput(input, &x)) {
      out.push_back(HaltingBranch(Rational(1), Message::Halt()));
      return out;
    }
    auto next = std::make_unique<MonotoneHistogramMechanism>(*this);
    Rng unused(0);
    const int64_t answer = next->core_.Update(x, unused);
    out.push_back(
        {Rational(1), Message::Answer(Value(answer)), std::move(next)});
    return out;
  }

  bool HasNativeSampler() const override { return !deterministic_; }

  Message SampleStep(const Message& input, Rng& rng) override {
    std::vector<int64_t> x;
    if (!ParseInput(input, &x)) {
      halted_ = true;
      return Message::Halt();
    }
    return Message::Answer(Value(core_.Update(x, rng)));
  }

  std::string DebugName() const override { return "hss"; }
  std::string SpaceId() const override { return "bit_vector"; }

  const HistogramCore& core() const { return core_; }

 private:
  bool ParseInput(const Message& input, std::vector<int64_t>* x) const {
    if (halted_ || core_.t() >= core_.config().T ||
        input.kind != MessageKind::kQuery || !input.payload.IsList()) {
      return false;
    }
    const ValueList& list = input.payload.AsList();
    if (list.size() != static_cast<size_t>(core_.config().d)) return false;
    for (const Value& v : list) {
      if (!v.IsBit()) return false;
      x->push_back(v.AsInt());
    }
    return true;
  }

  HistogramCore core_;
  bool deterministic_;
  bool halted_ = false;
};

}  // namespace

MechanismHandle MakeMonotoneHistogram(HistogramConfig config,
                                      NoiseSource::Mode noise_mode) {
  return MechanismHandle(std::make_unique<MonotoneHistogramMechanism>(
      std::move(config), noise_mode));
}

}  // namespace dplab
