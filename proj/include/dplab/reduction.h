#ifndef DPLAB_REDUCTION_H_
#define DPLAB_REDUCTION_H_

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dplab/ipm.h"
#include "dplab/mechanism.h"
#include "dplab/rational.h"

namespace dplab {

// One table layer per transcript depth. Transcripts over the declared query
// and answer orders are nodes of the complete tree: the root is node 0 at
// depth 0, and the (q, a) child of node h is h * |Q| * |A| + q * |A| + a at
// the next depth. Zero-probability transcripts keep their slots so the chain
// identities hold verbatim.
using LevelTable = std::vector<std::vector<Rational>>;
using PairedTables = std::array<LevelTable, 2>;

// Joint answer distribution of a two-input mechanism at every depth:
// mu[b][t][h] is the probability that input b produces transcript h.
struct AnswerTable {
  std::vector<Message> queries;
  std::vector<Message> answers;  // enumeration order; doubles as the answer
                                 // well-order for the constraint passes
  int64_t horizon = 0;
  PairedTables mu;

  int64_t LevelSize(int64_t t) const;
  int64_t Child(int64_t h, size_t q, size_t a) const {
    return (h * static_cast<int64_t>(queries.size()) +
            static_cast<int64_t>(q)) *
               static_cast<int64_t>(answers.size()) +
           static_cast<int64_t>(a);
  }
  // Largest |sum_a mu_t - mu_{t-1}|; zero for tables built here.
  Rational MaxChainResidual() const;
};

// Exact tables for the interaction of the two mechanisms against every
// query sequence from `queries`, by forward chain-rule multiplication of
// per-step conditional laws. The answer set is discovered from the branch
// enumerations and ordered by the Message order; a Halt answer is absorbing.
// Throws when either mechanism can still answer after `horizon` queries.
AnswerTable ComputeMu(const MechanismHandle& m0, const MechanismHandle& m1,
                      const std::vector<Message>& queries, int64_t horizon);

// Table built from an explicit conditional law (synthetic instances).
// law(b, h, q) maps each answer index to its probability; missing indices
// are zero. h is the node id of the parent transcript at depth t-1.
using StepLaw =
    std::function<std::map<size_t, Rational>(int b, int64_t t, int64_t h,
                                             size_t q)>;
AnswerTable ComputeMuFromLaw(std::vector<Message> queries,
                             std::vector<Message> answers, int64_t horizon,
                             const StepLaw& law);

// Backward control recursion at cutoff T <= mu.horizon:
//   l[b][T][h]        = max{0, mu^b - e_eps * mu^(1-b)}
//   lower[b][t][h,q]  = sum_a l[b][t][(h,q,a)]
//   l[b][t-1][h]      = max_q lower[b][t][h,q]
// lower[b][t] is indexed by h * |Q| + q over depth-(t-1) nodes.
struct ControlTables {
  int64_t cutoff = 0;
  PairedTables l;
  PairedTables lower;
};
ControlTables ComputeL(const AnswerTable& mu, const Rational& e_eps,
                       int64_t T);

// Per-answer constraint maximization, one 2-variable exact LP per transcript
// in answer order: xi takes the lexicographic maximum, phi the maximal
// equal-coordinate point when it is undominated, else the lexicographic
// maximum. Throws on an empty feasible region or when delta = 0 meets a
// nonzero control table (the input law is not DP at this e_eps).
struct ConstraintTables {
  PairedTables xi;
  PairedTables phi;  // phi[b][0] = {1}
};
ConstraintTables ComputeXiPhi(const AnswerTable& mu, const ControlTables& control,
                              const Rational& e_eps, const Rational& delta);

// Closed-form private-branch table; identical to phi at delta = 1.
PairedTables ComputePsi(const AnswerTable& mu, const PairedTables& phi,
                        const Rational& e_eps, const Rational& delta);

// Everything derived from one answer table. When delta is not given it is
// taken as max_b l[b][0][root] (the smallest budget the table saturates).
struct ReductionBundle {
  Rational e_eps;
  Rational delta;
  ControlTables control;
  ConstraintTables constraints;
  PairedTables psi;
};
ReductionBundle ComputeReduction(const AnswerTable& mu, const Rational& e_eps,
                                 std::optional<Rational> delta = std::nullopt);

// Exact residuals of every identity the tables promise. All fields are zero
// on tables computed by this module; nonzero values carry the worst offender.
struct ReductionReport {
  Rational chain_residual;        // |sum_a mu - mu_parent|
  Rational dominance_violation;   // (lower - l_parent)^+
  Rational budget_floor_violation;   // (l - delta * phi)^+
  Rational dp_gap_violation;         // (delta-scaled phi gap - mu gap)^+
  Rational phi_range_violation;      // distance of phi from [0, 1]
  Rational psi_negativity;           // (-psi)^+
  Rational phi_chain_residual;       // |sum_a phi - phi_parent|
  Rational psi_chain_residual;
  Rational symmetric_floor_violation;  // identical-law sequences: phi
                                       // asymmetry or floor miss
  Rational mixture_residual;  // |delta phi + (1-delta) irr-mix psi - mu|
  Rational Max() const;
  bool AllZero() const { return Max() == 0; }
};
ReductionReport VerifyReduction(const AnswerTable& mu,
                                const ReductionBundle& tables);

// Static mirror of the lazy post-processor: for a fixed query sequence,
// does either flag branch reach a transcript where the two per-input answer
// families differ (forcing the second request)?
struct InteractionProfile {
  bool exposed_second = false;
  bool private_second = false;
};
InteractionProfile AnalyzeInteractions(const AnswerTable& mu,
                                       const ReductionBundle& tables,
                                       const std::vector<size_t>& query_seq);

// The lazy relay that turns the two outputs of irr(e_eps, delta) into a
// faithful sample of the tabulated mechanism: it requests the flag on the
// first left query, answers from the per-flag family tables while the two
// input families agree, and requests the bit at the first transcript where
// they differ. Composed with irr at input b, its view distribution is
// mu[b] exactly. irr_requests, when given, counts the requests of a sampled
// run (reset it between runs; enumeration clones make it meaningless there).
IpmHandle BuildIrrPostprocessor(
    std::shared_ptr<const AnswerTable> mu,
    std::shared_ptr<const ReductionBundle> tables,
    std::shared_ptr<int64_t> irr_requests = nullptr);

}  // namespace dplab

#endif  // DPLAB_REDUCTION_H_
