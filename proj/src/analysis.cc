#include "dplab/analysis.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "dplab/mechanisms/randomized_response.h"

namespace dplab {
namespace {

// Single enumerated transition of a deterministic party.
std::pair<Message, MechanismHandle> DeterministicStep(
    const MechanismHandle& party, const Message& input,
    const char* party_name) {
  auto branches = party.EnumerateStep(input);
  if (branches.size() != 1 || branches[0].prob != 1) {
    throw std::invalid_argument(std::string(party_name) +
                                " is not deterministic");
  }
  return {branches[0].answer, MechanismHandle(std::move(branches[0].next))};
}

class ViewEnumerator {
 public:
  ViewEnumerator(int64_t horizon, int64_t node_budget)
      : horizon_(horizon), node_budget_(node_budget) {}

  std::vector<std::pair<Transcript, Rational>> Run(
      const MechanismHandle& adversary, const MechanismHandle& mech) {
    Transcript t;
    Expand(adversary, mech, Message::Empty(), 0, Rational(1), t);
    return std::move(out_);
  }

  EnumerationStats stats() const { return stats_; }

 private:
  void Charge(int64_t n) {
    stats_.nodes += n;
    if (stats_.nodes > node_budget_) {
      throw NodeBudgetExceeded("view enumeration exceeded the node budget of " +
                                   std::to_string(node_budget_),
                               stats_);
    }
  }

  void Leaf(Transcript t, int64_t round, const Rational& prob) {
    for (int64_t r = round; r < horizon_; ++r) {
      t.Push(Direction::kToMechanism, Message::Halt());
      t.Push(Direction::kToAdversary, Message::Halt());
    }
    ++stats_.leaves;
    out_.emplace_back(std::move(t), prob);
  }

  void Expand(const MechanismHandle& adversary, const MechanismHandle& mech,
              const Message& answer_to_adv, int64_t round,
              const Rational& prob, const Transcript& t) {
    if (round == horizon_) {
      Leaf(t, round, prob);
      return;
    }
    Charge(1);
    auto [query, next_adv] =
        DeterministicStep(adversary, answer_to_adv, "adversary");
    Transcript asked = t;
    asked.Push(Direction::kToMechanism, query);
    if (query.IsHalt()) {
      asked.Push(Direction::kToAdversary, Message::Halt());
      Leaf(std::move(asked), round + 1, prob);
      return;
    }
    for (auto& branch : mech.EnumerateStep(query)) {
      Charge(1);
      Transcript answered = asked;
      answered.Push(Direction::kToAdversary, branch.answer);
      Rational p = prob * branch.prob;
      if (branch.answer.IsHalt()) {
        Leaf(std::move(answered), round + 1, p);
      } else {
        Expand(next_adv, MechanismHandle(std::move(branch.next)),
               branch.answer, round + 1, p, answered);
      }
    }
  }

  const int64_t horizon_;
  const int64_t node_budget_;
  EnumerationStats stats_;
  std::vector<std::pair<Transcript, Rational>> out_;
};

class ScriptedAdversary final : public Mechanism {
 public:
  ScriptedAdversary(std::shared_ptr<const std::vector<Message>> script,
                    size_t pos)
      : script_(std::move(script)), pos_(pos) {}

  MechanismPtr Clone() const override {
    return std::make_unique<ScriptedAdversary>(script_, pos_);
  }

  std::vector<StepBranch> EnumerateStep(const Message&) const override {
    std::vector<StepBranch> out;
    if (pos_ >= script_->size()) {
      out.push_back(HaltingBranch(Rational(1), Message::Halt()));
    } else {
      out.push_back({Rational(1), (*script_)[pos_],
                     std::make_unique<ScriptedAdversary>(script_, pos_ + 1)});
    }
    return out;
  }

  std::string DebugName() const override { return "scripted_adversary"; }

 private:
  std::shared_ptr<const std::vector<Message>> script_;
  size_t pos_;
};

class TreeAdversary final : public Mechanism {
 public:
  TreeAdversary(std::shared_ptr<const StrategyNode> root,
                const StrategyNode* sent)
      : root_(std::move(root)), sent_(sent) {}

  MechanismPtr Clone() const override {
    return std::make_unique<TreeAdversary>(root_, sent_);
  }

  std::vector<StepBranch> EnumerateStep(const Message& input) const override {
    const StrategyNode* next = nullptr;
    if (sent_ == nullptr) {
      next = root_.get();
    } else {
      for (const auto& [answer, child] : sent_->on_answer) {
        if (answer == input) {
          next = child.get();
          break;
        }
      }
    }
    std::vector<StepBranch> out;
    if (next == nullptr) {
      out.push_back(HaltingBranch(Rational(1), Message::Halt()));
    } else {
      out.push_back({Rational(1), next->send,
                     std::make_unique<TreeAdversary>(root_, next)});
    }
    return out;
  }

  std::string DebugName() const override { return "tree_adversary"; }

 private:
  std::shared_ptr<const StrategyNode> root_;
  const StrategyNode* sent_;  // node whose message was emitted last
};

// States of the trip-probe adversary, in protocol order.
enum class ProbePhase { kStart, kAwaitAck, kAwaitProbe, kAwaitReveal, kDone };

class TripProbeAdversary final : public Mechanism {
 public:
  TripProbeAdversary(double delta, int max_mechs)
      : delta_(delta), max_mechs_(max_mechs) {}

  MechanismPtr Clone() const override {
    auto c = std::make_unique<TripProbeAdversary>(delta_, max_mechs_);
    c->phase_ = phase_;
    c->index_ = index_;
    return c;
  }

  std::vector<StepBranch> EnumerateStep(const Message& input) const override {
    std::vector<StepBranch> out;
    out.push_back({Rational(1), Message::Halt(), nullptr});
    auto& branch = out[0];
    auto next = [&](ProbePhase phase, Message m) {
      auto succ = std::make_unique<TripProbeAdversary>(delta_, max_mechs_);
      succ->phase_ = phase;
      succ->index_ = index_;
      branch.answer = std::move(m);
      branch.next = std::move(succ);
    };
    auto guess = [&](int bit) { next(ProbePhase::kDone, GuessMessage(bit)); };

    switch (phase_) {
      case ProbePhase::kStart:
        if (max_mechs_ < 1) {
          guess(0);
        } else {
          next(ProbePhase::kAwaitAck, CreateMessage());
        }
        break;
      case ProbePhase::kAwaitAck:
        if (input.kind == MessageKind::kAck) {
          next(ProbePhase::kAwaitProbe, ProbeMessage(index_, 0, 0));
        }
        break;
      case ProbePhase::kAwaitProbe:
        if (input.kind == MessageKind::kAnswer && input.payload.IsFlag()) {
          if (input.payload.AsFlag() == Flag::kTop) {
            if (index_ < max_mechs_) {
              next(ProbePhase::kAwaitAck, CreateMessage());
              static_cast<TripProbeAdversary&>(*branch.next).index_ =
                  index_ + 1;
            } else {
              guess(0);
            }
          } else {
            next(ProbePhase::kAwaitReveal, ProbeMessage(index_, 0, 1));
          }
        }
        break;
      case ProbePhase::kAwaitReveal:
        if (input.kind == MessageKind::kAnswer && input.payload.IsBit()) {
          guess(static_cast<int>(input.payload.AsInt()));
        }
        break;
      case ProbePhase::kDone:
        break;
    }
    if (branch.next == nullptr) branch.next = MakeHalted();
    return out;
  }

  std::string DebugName() const override { return "trip_probe_adversary"; }

 private:
  Message CreateMessage() const {
    Value c = MakeCreationValue({"m_delta", Value::Unit(),
                                 PrivacyParams::FromDouble(0.0, delta_),
                                 "m_delta_g"});
    return Message::QueryPair(c, c);
  }
  static Message ProbeMessage(int index, int bit0, int bit1) {
    return Message::QueryPair(Value::Pair(Value(bit0), Value(index)),
                              Value::Pair(Value(bit1), Value(index)));
  }
  static Message GuessMessage(int bit) { return Message::Query(Value(bit)); }

  double delta_;
  int max_mechs_;
  ProbePhase phase_ = ProbePhase::kStart;
  int index_ = 1;  // mechanism currently being probed (creation order)
};

// Last non-halt message the adversary sent; its payload is the guess.
int ExtractGuess(const Transcript& t) {
  for (auto it = t.messages.rbegin(); it != t.messages.rend(); ++it) {
    if (it->first != Direction::kToMechanism || it->second.IsHalt()) continue;
    if (!it->second.payload.IsBit()) {
      throw std::invalid_argument(
          "adversary ended without a bit guess (last message: " +
          it->second.ToString() + ")");
    }
    return static_cast<int>(it->second.payload.AsInt());
  }
  throw std::invalid_argument("adversary ended without a bit guess");
}

}  // namespace

std::vector<std::pair<Transcript, Rational>> EnumerateTranscripts(
    const MechanismHandle& adversary, const MechanismHandle& mech,
    int64_t horizon, int64_t node_budget, EnumerationStats* stats) {
  if (!adversary.Valid() || !mech.Valid()) {
    throw std::invalid_argument("enumeration needs both parties");
  }
  if (horizon < 1) throw std::invalid_argument("horizon must be positive");
  if (!adversary.SupportsEnumeration() || !mech.SupportsEnumeration()) {
    throw std::invalid_argument(
        "view enumeration needs enumerable parties (got " +
        adversary.impl().DebugName() + " vs " + mech.impl().DebugName() + ")");
  }
  ViewEnumerator e(horizon, node_budget);
  auto rows = e.Run(adversary, mech);
  if (stats != nullptr) *stats = e.stats();
  return rows;
}

DiscretePmf EnumerateViews(const MechanismHandle& adversary,
                           const MechanismHandle& mech, int64_t horizon,
                           int64_t node_budget, EnumerationStats* stats) {
  DiscretePmf pmf;
  for (const auto& [t, p] :
       EnumerateTranscripts(adversary, mech, horizon, node_budget, stats)) {
    pmf.Add(t.Key(), p);
  }
  return pmf;
}

MechanismHandle MakeScriptedAdversary(std::vector<Message> script) {
  return MechanismHandle(std::make_unique<ScriptedAdversary>(
      std::make_shared<const std::vector<Message>>(std::move(script)), 0));
}

MechanismHandle MakeTreeAdversary(std::shared_ptr<const StrategyNode> root) {
  if (root == nullptr) throw std::invalid_argument("empty strategy");
  return MechanismHandle(
      std::make_unique<TreeAdversary>(std::move(root), nullptr));
}

std::vector<TwoChildTemplate> EnumerateTwoChildTemplates() {
  static constexpr std::array<std::array<int, 2>, 4> kPairs = {
      {{0, 0}, {0, 1}, {1, 0}, {1, 1}}};
  std::vector<TwoChildTemplate> out;
  out.reserve(128);
  for (int first = 1; first <= 2; ++first) {
    for (const auto& x : kPairs) {
      for (const auto& y0 : kPairs) {
        for (const auto& y1 : kPairs) {
          out.push_back({first, x, {y0, y1}});
        }
      }
    }
  }
  return out;
}

MechanismHandle MakeTemplateAdversary(const TwoChildTemplate& tpl,
                                      const CreationQuery& alpha1,
                                      const CreationQuery& alpha2) {
  if (tpl.first != 1 && tpl.first != 2) {
    throw std::invalid_argument("template: first child index must be 1 or 2");
  }
  const int second = 3 - tpl.first;
  auto routed = [](int bit_left, int bit_right, int index) {
    return Message::QueryPair(Value::Pair(Value(bit_left), Value(index)),
                              Value::Pair(Value(bit_right), Value(index)));
  };
  // The two follow-up nodes are shared by answers with the same bit.
  std::array<std::shared_ptr<const StrategyNode>, 2> follow;
  for (int bit = 0; bit < 2; ++bit) {
    follow[bit] = std::make_shared<const StrategyNode>(
        StrategyNode{routed(tpl.y[bit][0], tpl.y[bit][1], second), {}});
  }
  StrategyNode challenge{routed(tpl.x[0], tpl.x[1], tpl.first), {}};
  for (int bit = 0; bit < 2; ++bit) {
    for (RrFlag flag : {RrFlag::kExposed, RrFlag::kPrivate}) {
      challenge.on_answer.emplace_back(
          Message::Answer(RrOutcomeValue(flag, bit)), follow[bit]);
    }
  }
  const Message ack = Message::Ack(Value(Flag::kTop));
  auto create = [&ack](const CreationQuery& alpha, StrategyNode then) {
    const Value c = MakeCreationValue(alpha);
    return StrategyNode{
        Message::QueryPair(c, c),
        {{ack, std::make_shared<const StrategyNode>(std::move(then))}}};
  };
  StrategyNode root = create(alpha1, create(alpha2, std::move(challenge)));
  return MakeTreeAdversary(
      std::make_shared<const StrategyNode>(std::move(root)));
}

PrivacyParams ImprovedBasic(const std::vector<PrivacyParams>& params) {
  double epsilon = 0.0;
  Rational rho = 1;
  Rational keep = 1;
  for (const auto& p : params) {
    epsilon += p.epsilon;
    rho *= p.rho;
    keep *= Rational(1) - p.delta_exact;
  }
  Rational delta = Rational(1) - keep;
  return PrivacyParams{epsilon, ToDouble(delta), std::move(rho),
                       std::move(delta)};
}

WilsonInterval Wilson99(int64_t successes, int64_t trials) {
  if (trials <= 0) return {0.0, 1.0};
  const double z = kWilsonZ99;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

GameResult RunDistinguishingGame(
    const MechanismHandle& adversary,
    const std::function<MechanismHandle(int)>& stack_builder, int64_t trials,
    uint64_t seed, int64_t transcript_sample_size) {
  if (!adversary.Valid()) throw std::invalid_argument("missing adversary");
  if (trials < 1) throw std::invalid_argument("trials must be positive");
  GameResult result;
  result.trials = trials;
  Rng base(seed);
  for (int64_t i = 0; i < trials; ++i) {
    const int b = static_cast<int>(base.Split2(i, 0).Next() & 1);
    const uint64_t run_seed = base.Split2(i, 1).Next();
    Transcript t = RunInteraction(adversary, stack_builder(b), run_seed);
    if (ExtractGuess(t) == b) ++result.successes;
    if (static_cast<int64_t>(result.transcript_sample.size()) <
        transcript_sample_size) {
      result.transcript_sample.push_back(std::move(t));
    }
  }
  result.success_rate =
      static_cast<double>(result.successes) / static_cast<double>(trials);
  result.ci = Wilson99(result.successes, trials);
  return result;
}

MechanismHandle MakeTripProbeAdversary(double delta, int max_mechs) {
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("delta outside [0, 1]");
  }
  if (max_mechs < 0) throw std::invalid_argument("negative mechanism budget");
  return MechanismHandle(
      std::make_unique<TripProbeAdversary>(delta, max_mechs));
}

namespace {

std::optional<StructuralViolation> FirstEventDivergence(
    const std::vector<TraceEvent>& a, const std::vector<TraceEvent>& b) {
  const size_t n = std::min(a.size(), b.size());
  for (size_t k = 0; k < n; ++k) {
    if (a[k].kind != b[k].kind) {
      return StructuralViolation{k, "event kind differs"};
    }
    if (a[k].kind == TraceEvent::Kind::kCreate) {
      if (!(a[k].creation == b[k].creation)) {
        return StructuralViolation{k, "creation differs: " +
                                          a[k].creation.ToString() + " vs " +
                                          b[k].creation.ToString()};
      }
    } else if (a[k].child != b[k].child) {
      return StructuralViolation{
          k, "call targets child " + std::to_string(a[k].child) + " vs " +
                 std::to_string(b[k].child)};
    }
  }
  if (a.size() != b.size()) {
    return StructuralViolation{n, "event count differs (" +
                                      std::to_string(a.size()) + " vs " +
                                      std::to_string(b.size()) + ")"};
  }
  return std::nullopt;
}

}  // namespace

StructuralReport CheckStructuralProperties(const InstrumentedTrace& a,
                                           const InstrumentedTrace& b,
                                           const Registry& registry) {
  StructuralReport report;

  report.destination_witness = FirstEventDivergence(a.events, b.events);
  report.destination_ok = !report.destination_witness.has_value();

  const size_t outs = std::min(a.outputs.size(), b.outputs.size());
  for (size_t k = 0; k < outs && report.response_ok; ++k) {
    if (a.outputs[k] != b.outputs[k]) {
      report.response_ok = false;
      report.response_witness = StructuralViolation{
          k, "output differs: " + a.outputs[k].ToString() + " vs " +
                 b.outputs[k].ToString()};
    }
  }
  if (report.response_ok && a.outputs.size() != b.outputs.size()) {
    report.response_ok = false;
    report.response_witness =
        StructuralViolation{outs, "output count differs"};
  }

  const auto creations_a = a.Creations();
  const auto creations_b = b.Creations();
  const size_t children = std::min(creations_a.size(), creations_b.size());
  for (size_t c = 0; c < children; ++c) {
    const auto in_a = a.InputsFor(c);
    const auto in_b = b.InputsFor(c);
    auto flag = [&](std::string detail) {
      if (report.mapping_ok) {
        report.mapping_ok = false;
        report.mapping_witness = StructuralViolation{c, std::move(detail)};
      }
    };
    if (in_a.size() != in_b.size()) {
      flag("child input count differs");
      continue;
    }
    std::vector<std::pair<Value, Value>> pairs;
    pairs.reserve(in_a.size());
    bool differs = false;
    for (size_t k = 0; k < in_a.size(); ++k) {
      differs = differs || in_a[k] != in_b[k];
      pairs.emplace_back(in_a[k], in_b[k]);
    }
    if (differs) ++report.differing_children[creations_a[c].mech_id];
    const ChildVf* vf = registry.FindChildVf(creations_a[c].vf_id);
    if (vf == nullptr) {
      flag("unknown child verification function " + creations_a[c].vf_id);
    } else if (!vf->accepts(pairs)) {
      flag("inputs to child " + std::to_string(c) + " (" +
           creations_a[c].mech_id + ") violate " + vf->id);
    }
  }
  return report;
}

}  // namespace dplab
