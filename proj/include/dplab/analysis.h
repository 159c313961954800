#ifndef DPLAB_ANALYSIS_H_
#define DPLAB_ANALYSIS_H_

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dplab/compose.h"
#include "dplab/mechanisms/monotone_histogram.h"
#include "dplab/pmf.h"
#include "dplab/registry.h"
#include "dplab/transcript.h"

namespace dplab {

inline constexpr int64_t kDefaultNodeBudget = 10'000'000;

struct EnumerationStats {
  int64_t nodes = 0;
  int64_t leaves = 0;
};

class NodeBudgetExceeded : public std::runtime_error {
 public:
  NodeBudgetExceeded(const std::string& what, EnumerationStats stats)
      : std::runtime_error(what), stats(stats) {}
  EnumerationStats stats;
};

// Exhaustive view oracle: exact distribution of the interaction between a
// deterministic adversary and an enumerable mechanism over `horizon` rounds.
// Every transcript is padded with Halt rounds after termination so all
// outcomes share one shape. Throws NodeBudgetExceeded when the answer tree
// outgrows `node_budget`.
std::vector<std::pair<Transcript, Rational>> EnumerateTranscripts(
    const MechanismHandle& adversary, const MechanismHandle& mech,
    int64_t horizon, int64_t node_budget = kDefaultNodeBudget,
    EnumerationStats* stats = nullptr);

// Same traversal, collapsed to a PMF over Transcript keys.
DiscretePmf EnumerateViews(const MechanismHandle& adversary,
                           const MechanismHandle& mech, int64_t horizon,
                           int64_t node_budget = kDefaultNodeBudget,
                           EnumerationStats* stats = nullptr);

// Adversary that plays a fixed message list regardless of answers, then
// halts.
MechanismHandle MakeScriptedAdversary(std::vector<Message> script);

// Adaptive deterministic adversary as an explicit decision tree: emit `send`,
// then continue at the child matching the answer received (halt when none
// matches).
struct StrategyNode {
  Message send;
  std::vector<std::pair<Message, std::shared_ptr<const StrategyNode>>>
      on_answer;
};

MechanismHandle MakeTreeAdversary(std::shared_ptr<const StrategyNode> root);

// One strategy against a composition hosting two bit-input children behind
// a query-pair front end: `first` (1-based) receives the challenge pair x,
// and the other child receives the follow-up pair y[bit] keyed by the bit of
// the first answer.
struct TwoChildTemplate {
  int first = 1;
  std::array<int, 2> x{};
  std::array<std::array<int, 2>, 2> y{};
};

// All 128 templates: first in {1, 2}, then x, y[0], y[1] each over the four
// bit pairs in lexicographic order, with y[1] varying fastest.
std::vector<TwoChildTemplate> EnumerateTwoChildTemplates();

// Deterministic strategy tree realizing one template: create alpha1, create
// alpha2 (expecting a top-flag ack for each), send the challenge pair to
// tpl.first, branch on the bit of the randomized-response answer, send the
// follow-up pair to the other child, then halt.
MechanismHandle MakeTemplateAdversary(const TwoChildTemplate& tpl,
                                      const CreationQuery& alpha1,
                                      const CreationQuery& alpha2);

// Sequential composition accounting: (sum epsilon_i, 1 - prod(1 - delta_i)),
// with exact carriers (rho = prod rho_i).
PrivacyParams ImprovedBasic(const std::vector<PrivacyParams>& params);

inline constexpr double kWilsonZ99 = 2.5758293035489004;

struct WilsonInterval {
  double low = 0.0;
  double high = 1.0;
};

// 99% Wilson score interval for `successes` out of `trials`.
WilsonInterval Wilson99(int64_t successes, int64_t trials);

struct GameResult {
  int64_t trials = 0;
  int64_t successes = 0;
  double success_rate = 0.0;
  WilsonInterval ci;
  std::vector<Transcript> transcript_sample;
};

// Indistinguishability game: per trial draw a uniform bit b, run the
// adversary against stack_builder(b), and score whether its final guess (the
// payload of its last non-halt message, which must be a bit) equals b.
GameResult RunDistinguishingGame(
    const MechanismHandle& adversary,
    const std::function<MechanismHandle(int)>& stack_builder, int64_t trials,
    uint64_t seed, int64_t transcript_sample_size = 3);

// The exposure-hunting adversary for the trip/reveal counterexample stack:
// create a trip mechanism with parameters (0, delta), probe it with the
// identical bit pair (0, 0); while it stays armed, create the next one (up
// to max_mechs, then guess 0); once one trips, send the revealing pair
// (0, 1) and guess the bit that comes back.
MechanismHandle MakeTripProbeAdversary(double delta, int max_mechs);

struct StructuralViolation {
  size_t index = 0;  // event or output position of the first divergence
  std::string detail;
};

struct StructuralReport {
  bool destination_ok = true;
  bool response_ok = true;
  bool mapping_ok = true;
  std::optional<StructuralViolation> destination_witness;
  std::optional<StructuralViolation> response_witness;
  std::optional<StructuralViolation> mapping_witness;
  // Children (by constructor id) that received at least one differing input
  // across the two runs.
  std::map<std::string, size_t> differing_children;

  bool AllOk() const { return destination_ok && response_ok && mapping_ok; }
};

// Compares two instrumented runs whose decision variables are coupled (the
// second run replays the first run's child answers): identical
// creation/targeting order, identical outputs, and per-child input pairs
// satisfying the child's declared verification function.
StructuralReport CheckStructuralProperties(const InstrumentedTrace& a,
                                           const InstrumentedTrace& b,
                                           const Registry& registry);

}  // namespace dplab

#endif  // DPLAB_ANALYSIS_H_
