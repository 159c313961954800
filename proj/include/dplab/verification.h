#ifndef DPLAB_VERIFICATION_H_
#define DPLAB_VERIFICATION_H_

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dplab/ipm.h"
#include "dplab/message.h"

namespace dplab {

class Registry;

// Predicate over the stripped query-pair subsequence routed to one child:
// element k is (world-0 input, world-1 input) of the k-th query that child
// received. These are the per-mechanism conditions creation queries name by
// id; forms of neighboring relations live here too.
struct ChildVf {
  std::string id;
  std::function<bool(const std::vector<std::pair<Value, Value>>&)> accepts;
};

// Predicate over the full left-message sequence seen by a verifier: creation
// pairs and routed query pairs. Pure and deterministic; the verifier
// re-evaluates it on every prefix, and every built-in constructor is
// prefix-monotone by construction.
struct VerificationFn {
  std::string id;
  std::function<bool(const std::vector<Message>&)> accepts;
};

// Continue/halt as a function of the privacy parameters claimed so far, in
// order. Feeds the filtered verification functions and the CLI accountants.
struct Filter {
  std::string id;
  std::function<bool(const std::vector<PrivacyParams>&)> accepts;
};

bool FilterEval(const Filter& filt, const std::vector<PrivacyParams>& sigma);

// Sum budgets: accepts while sum(epsilon) <= eps_budget and
// sum(delta) <= delta_budget.
Filter MakeBudgetFilter(double eps_budget, double delta_budget);
// Product rule on deltas only: accepts while 1 - prod(1 - delta_i) <=
// delta_budget (exact; the boundary itself is accepted).
Filter MakeProductFilter(double delta_budget);
Filter MakeProductFilter(Rational delta_budget);

struct SuitabilityResult {
  bool ok = true;
  std::string reason;  // machine-readable code, empty when ok
  size_t index = 0;    // offending message position when not ok

  explicit operator bool() const { return ok; }
};

// Parse of a suitable prefix: the claimed creations in order and, per child
// (0-based), its stripped query-pair subsequence.
struct ParsedSequence {
  SuitabilityResult status;
  std::vector<CreationQuery> creations;
  std::vector<std::vector<std::pair<Value, Value>>> child_pairs;
};

// Structural core shared by every verification function. A sequence is
// suitable when each message is either a pair of identical registry-certified
// creation queries, or a pair of (query, index) routings to the same
// already-created child with queries in that child's space and the child's
// declared per-mechanism condition accepting its pair subsequence so far.
// Reason codes: not-a-pair, creation-pair-mismatch, malformed-query,
// index-mismatch, index-unavailable, query-space, uncertified, child-vf.
ParsedSequence ParseSuitable(const std::vector<Message>& msgs,
                             const Registry& registry);
SuitabilityResult IsSuitable(const std::vector<Message>& msgs,
                             const Registry& registry);

// Accepts exactly the suitable sequences.
VerificationFn SuitableVf(const Registry& registry);

// Constant verdicts.
VerificationFn TrueVf();
VerificationFn FalseVf();

// Single-mechanism setting (a verifier in front of a bare mechanism, no
// routing): each left message must be a pair of plain values, and the
// stripped (v0, v1) sequence must satisfy `vf`.
VerificationFn LiftChildVf(ChildVf vf);

// Suitable, and the first min(t, k) messages are exactly the fixed identical
// creation pairs alphas[0..].
VerificationFn FixedMechsVf(std::vector<CreationQuery> alphas,
                            const Registry& registry);

// Suitable, and the multiset of claimed creation parameters so far is a
// sub-multiset of `fixed`.
VerificationFn FixedParamsVf(std::vector<PrivacyParams> fixed,
                             const Registry& registry);

// k-sparse parallel composition with k = slots.size(): suitable, at most k
// children ever receive a non-identical query pair, and the claimed
// parameters of those children form a sub-multiset of `slots`.
VerificationFn ParallelSparseVf(std::vector<PrivacyParams> slots,
                                const Registry& registry);

// Budgeted unbounded variant: suitable, every creation is the one-shot
// randomized response with epsilon' = 0 or delta' = 0, the positive claimed
// epsilons form a sub-multiset of `epsilons`, and the claimed deltas satisfy
// 1 - prod(1 - delta_j) <= delta_budget.
VerificationFn ParallelBudgetVf(std::vector<double> epsilons,
                                double delta_budget, const Registry& registry);
VerificationFn ParallelBudgetVf(std::vector<double> epsilons,
                                Rational delta_budget,
                                const Registry& registry);

// Suitable, every creation is the one-shot randomized response with
// epsilon' = 0, and 1 - prod(1 - delta_j) <= delta_budget (boundary
// accepted; the comparison is exact).
VerificationFn RrBudgetVf(double delta_budget, const Registry& registry);
VerificationFn RrBudgetVf(Rational delta_budget, const Registry& registry);

// base, and per child: if its first query pair is identical then all its
// query pairs are identical.
VerificationFn FpcWrap(VerificationFn base, const Registry& registry);

// Suitable, and the filter accepts the ordered claimed parameter sequence.
VerificationFn FilterVf(Filter filt, const Registry& registry);
// FilterVf restricted to randomized-response creations.
VerificationFn FilterRrVf(Filter filt, const Registry& registry);

// Suitable, and every child's stripped pair subsequence satisfies the
// neighboring relation named by relation_id ("event", "event01", "linf1").
VerificationFn NeighborVf(const std::string& relation_id,
                          const Registry& registry);

// Built-in per-mechanism conditions, registered under their ids.
ChildVf TrueChildVf();          // "true": anything
ChildVf RrSingleChildVf();      // "rr_single": at most one bit pair
ChildVf MDeltaGChildVf();       // "m_delta_g": <=2 bit pairs, <=1 differing
ChildVf IrrQueriesChildVf();    // "irr_queries": every component is 0
ChildVf LaplaceSingleChildVf();  // "laplace_single": one int pair, |diff|<=1
// Neighboring relations over query streams.
ChildVf NeighborEventChildVf();    // ints, <=1 differing step, |diff|<=1
ChildVf NeighborEvent01ChildVf();  // bit vectors (opt. equal public
                                   // threshold), <=1 differing step
ChildVf NeighborLinf1ChildVf();    // int vectors, <=1 differing step, each
                                   // coordinate there off by <=1

// Relay holding a secret bit: forwards element b of each left query pair to
// the right (creation payloads keep their creation kind) and every right
// message to the left unchanged. A left message that is not a pair halts.
IpmHandle MakeIdentifier(int b);

// Relay that appends each left message to its history and forwards it right
// while f accepts the history; on the first rejection it halts. Right
// messages pass through unchanged.
IpmHandle MakeVerifier(VerificationFn f);

}  // namespace dplab

#endif  // DPLAB_VERIFICATION_H_
