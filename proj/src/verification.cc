#include "dplab/verification.h"

#include <algorithm>
#include <cstdlib>
#include <memory>
#include <stdexcept>

#include "dplab/registry.h"

namespace dplab {

namespace {

using PairSeq = std::vector<std::pair<Value, Value>>;

bool AllBits(const PairSeq& pairs) {
  for (const auto& [a, b] : pairs) {
    if (!a.IsBit() || !b.IsBit()) return false;
  }
  return true;
}

size_t CountDiffering(const PairSeq& pairs) {
  size_t n = 0;
  for (const auto& [a, b] : pairs) {
    if (a != b) ++n;
  }
  return n;
}

// Splits an "event01" component into its bit vector and optional public
// threshold: either a plain list of bits, or [bit-list, threshold].
bool SplitEvent01(const Value& v, const ValueList** xs, const Value** thresh) {
  if (!v.IsList()) return false;
  const ValueList& list = v.AsList();
  if (list.size() == 2 && list[0].IsList() &&
      (list[1].IsInt() || list[1].IsRational())) {
    *xs = &list[0].AsList();
    *thresh = &list[1];
  } else {
    *xs = &list;
    *thresh = nullptr;
  }
  for (const Value& x : **xs) {
    if (!x.IsBit()) return false;
  }
  return true;
}

bool IsIntVector(const Value& v) {
  if (!v.IsList()) return false;
  for (const Value& x : v.AsList()) {
    if (!x.IsInt()) return false;
  }
  return true;
}

template <typename T>
bool IsSubMultiset(std::vector<T> sub, std::vector<T> super) {
  std::sort(sub.begin(), sub.end());
  std::sort(super.begin(), super.end());
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

Rational ProductRuleDelta(const std::vector<PrivacyParams>& sigma) {
  Rational keep = 1;
  for (const PrivacyParams& p : sigma) keep *= Rational(1) - p.delta_exact;
  return Rational(1) - keep;
}

std::vector<PrivacyParams> CreationParams(
    const std::vector<CreationQuery>& creations) {
  std::vector<PrivacyParams> out;
  out.reserve(creations.size());
  for (const CreationQuery& cq : creations) out.push_back(cq.params);
  return out;
}

// Appends one message to the parse state; returns a reason code or nullptr.
const char* CheckMessage(const Message& m, const Registry& registry,
                         ParsedSequence* st) {
  if (!m.IsPair()) return "not-a-pair";
  const Value& c0 = m.payload.AsList()[0];
  const Value& c1 = m.payload.AsList()[1];
  if (c0.IsCreation() || c1.IsCreation()) {
    if (!c0.IsCreation() || !c1.IsCreation() ||
        !(*c0.AsCreation() == *c1.AsCreation())) {
      return "creation-pair-mismatch";
    }
    const CreationQuery& cq = *c0.AsCreation();
    if (!registry.Certifies(cq)) return "uncertified";
    st->creations.push_back(cq);
    st->child_pairs.emplace_back();
    return nullptr;
  }
  auto route = [](const Value& c, int64_t* index) -> const Value* {
    if (!c.IsList() || c.AsList().size() != 2 || !c.AsList()[1].IsInt() ||
        c.AsList()[1].AsInt() < 1) {
      return nullptr;
    }
    *index = c.AsList()[1].AsInt();
    return &c.AsList()[0];
  };
  int64_t i0 = 0;
  int64_t i1 = 0;
  const Value* q0 = route(c0, &i0);
  const Value* q1 = route(c1, &i1);
  if (q0 == nullptr || q1 == nullptr) return "malformed-query";
  if (i0 != i1) return "index-mismatch";
  if (static_cast<size_t>(i0) > st->creations.size()) {
    return "index-unavailable";
  }
  const CreationQuery& creator = st->creations[static_cast<size_t>(i0) - 1];
  if (!registry.QueryInSpace(creator, *q0) ||
      !registry.QueryInSpace(creator, *q1)) {
    return "query-space";
  }
  const ChildVf* vf = registry.FindChildVf(creator.vf_id);
  if (vf == nullptr) return "uncertified";
  PairSeq& pairs = st->child_pairs[static_cast<size_t>(i0) - 1];
  pairs.emplace_back(*q0, *q1);
  if (!vf->accepts(pairs)) return "child-vf";
  return nullptr;
}

// Shared skeleton: parse, then apply an extra predicate over the parse.
VerificationFn SuitableAnd(
    std::string id, const Registry& registry,
    std::function<bool(const ParsedSequence&, const std::vector<Message>&)>
        extra) {
  auto reg = std::make_shared<const Registry>(registry);
  return {std::move(id),
          [reg, extra = std::move(extra)](const std::vector<Message>& msgs) {
            ParsedSequence ps = ParseSuitable(msgs, *reg);
            return ps.status.ok && extra(ps, msgs);
          }};
}

bool AllRr(const std::vector<CreationQuery>& creations) {
  for (const CreationQuery& cq : creations) {
    if (cq.mech_id != "rr") return false;
  }
  return true;
}

}  // namespace

bool FilterEval(const Filter& filt, const std::vector<PrivacyParams>& sigma) {
  return filt.accepts(sigma);
}

Filter MakeBudgetFilter(double eps_budget, double delta_budget) {
  if (eps_budget < 0 || delta_budget < 0) {
    throw std::invalid_argument("MakeBudgetFilter: budgets must be >= 0");
  }
  const Rational eb = RationalFromDouble(eps_budget);
  const Rational db = RationalFromDouble(delta_budget);
  return {"budget", [eb, db](const std::vector<PrivacyParams>& sigma) {
            Rational eps_sum = 0;
            Rational delta_sum = 0;
            for (const PrivacyParams& p : sigma) {
              eps_sum += RationalFromDouble(p.epsilon);
              delta_sum += p.delta_exact;
            }
            return eps_sum <= eb && delta_sum <= db;
          }};
}

Filter MakeProductFilter(Rational delta_budget) {
  if (delta_budget < 0 || delta_budget > 1) {
    throw std::invalid_argument("MakeProductFilter: budget must be in [0,1]");
  }
  return {"product",
          [delta_budget](const std::vector<PrivacyParams>& sigma) {
            return ProductRuleDelta(sigma) <= delta_budget;
          }};
}

Filter MakeProductFilter(double delta_budget) {
  return MakeProductFilter(RationalFromDouble(delta_budget));
}

ParsedSequence ParseSuitable(const std::vector<Message>& msgs,
                             const Registry& registry) {
  ParsedSequence out;
  for (size_t i = 0; i < msgs.size(); ++i) {
    if (const char* code = CheckMessage(msgs[i], registry, &out)) {
      out.status = {false, code, i};
      return out;
    }
  }
  return out;
}

SuitabilityResult IsSuitable(const std::vector<Message>& msgs,
                             const Registry& registry) {
  return ParseSuitable(msgs, registry).status;
}

VerificationFn SuitableVf(const Registry& registry) {
  return SuitableAnd("suitable", registry,
                     [](const ParsedSequence&, const std::vector<Message>&) {
                       return true;
                     });
}

VerificationFn TrueVf() {
  return {"true", [](const std::vector<Message>&) { return true; }};
}

VerificationFn FalseVf() {
  return {"false", [](const std::vector<Message>&) { return false; }};
}

VerificationFn LiftChildVf(ChildVf vf) {
  return {"lift:" + vf.id,
          [vf = std::move(vf)](const std::vector<Message>& msgs) {
            PairSeq pairs;
            pairs.reserve(msgs.size());
            for (const Message& m : msgs) {
              if (!m.IsPair()) return false;
              const ValueList& p = m.payload.AsList();
              if (p[0].IsCreation() || p[1].IsCreation()) return false;
              pairs.emplace_back(p[0], p[1]);
            }
            return vf.accepts(pairs);
          }};
}

VerificationFn FixedMechsVf(std::vector<CreationQuery> alphas,
                            const Registry& registry) {
  for (const CreationQuery& a : alphas) {
    if (!registry.Certifies(a)) {
      throw std::invalid_argument("FixedMechsVf: uncertified creation " +
                                  a.ToString());
    }
  }
  return SuitableAnd(
      "fixed_mechs", registry,
      [alphas = std::move(alphas)](const ParsedSequence&,
                                   const std::vector<Message>& msgs) {
        const size_t k = std::min(msgs.size(), alphas.size());
        for (size_t i = 0; i < k; ++i) {
          const ValueList& p = msgs[i].payload.AsList();
          if (!p[0].IsCreation() || !(*p[0].AsCreation() == alphas[i])) {
            return false;
          }
        }
        return true;
      });
}

VerificationFn FixedParamsVf(std::vector<PrivacyParams> fixed,
                             const Registry& registry) {
  return SuitableAnd(
      "fixed_params", registry,
      [fixed = std::move(fixed)](const ParsedSequence& ps,
                                 const std::vector<Message>&) {
        return IsSubMultiset(CreationParams(ps.creations), fixed);
      });
}

VerificationFn ParallelSparseVf(std::vector<PrivacyParams> slots,
                                const Registry& registry) {
  return SuitableAnd(
      "parallel_sparse", registry,
      [slots = std::move(slots)](const ParsedSequence& ps,
                                 const std::vector<Message>&) {
        std::vector<PrivacyParams> hot;
        for (size_t i = 0; i < ps.child_pairs.size(); ++i) {
          if (CountDiffering(ps.child_pairs[i]) > 0) {
            hot.push_back(ps.creations[i].params);
          }
        }
        return hot.size() <= slots.size() && IsSubMultiset(hot, slots);
      });
}

VerificationFn ParallelBudgetVf(std::vector<double> epsilons,
                                Rational delta_budget,
                                const Registry& registry) {
  if (delta_budget < 0 || delta_budget > 1) {
    throw std::invalid_argument("ParallelBudgetVf: budget must be in [0,1]");
  }
  return SuitableAnd(
      "parallel_budget", registry,
      [epsilons = std::move(epsilons), delta_budget](
          const ParsedSequence& ps, const std::vector<Message>&) {
        std::vector<double> positive;
        for (const CreationQuery& cq : ps.creations) {
          if (cq.mech_id != "rr") return false;
          if (cq.params.rho != 1 && cq.params.delta_exact != 0) return false;
          if (cq.params.rho != 1) positive.push_back(cq.params.epsilon);
        }
        return IsSubMultiset(positive, epsilons) &&
               ProductRuleDelta(CreationParams(ps.creations)) <= delta_budget;
      });
}

VerificationFn ParallelBudgetVf(std::vector<double> epsilons,
                                double delta_budget,
                                const Registry& registry) {
  return ParallelBudgetVf(std::move(epsilons),
                          RationalFromDouble(delta_budget), registry);
}

VerificationFn RrBudgetVf(Rational delta_budget, const Registry& registry) {
  if (delta_budget < 0 || delta_budget > 1) {
    throw std::invalid_argument("RrBudgetVf: budget must be in [0,1]");
  }
  return SuitableAnd(
      "rr_budget", registry,
      [delta_budget](const ParsedSequence& ps, const std::vector<Message>&) {
        for (const CreationQuery& cq : ps.creations) {
          if (cq.mech_id != "rr" || cq.params.rho != 1) return false;
        }
        return ProductRuleDelta(CreationParams(ps.creations)) <= delta_budget;
      });
}

VerificationFn RrBudgetVf(double delta_budget, const Registry& registry) {
  return RrBudgetVf(RationalFromDouble(delta_budget), registry);
}

VerificationFn FpcWrap(VerificationFn base, const Registry& registry) {
  return SuitableAnd(
      "fpc:" + base.id, registry,
      [base = std::move(base)](const ParsedSequence& ps,
                               const std::vector<Message>& msgs) {
        if (!base.accepts(msgs)) return false;
        for (const PairSeq& pairs : ps.child_pairs) {
          if (pairs.empty() || pairs[0].first != pairs[0].second) continue;
          if (CountDiffering(pairs) > 0) return false;
        }
        return true;
      });
}

VerificationFn FilterVf(Filter filt, const Registry& registry) {
  return SuitableAnd(
      "filter:" + filt.id, registry,
      [filt = std::move(filt)](const ParsedSequence& ps,
                               const std::vector<Message>&) {
        return filt.accepts(CreationParams(ps.creations));
      });
}

VerificationFn FilterRrVf(Filter filt, const Registry& registry) {
  return SuitableAnd(
      "filter_rr:" + filt.id, registry,
      [filt = std::move(filt)](const ParsedSequence& ps,
                               const std::vector<Message>&) {
        return AllRr(ps.creations) &&
               filt.accepts(CreationParams(ps.creations));
      });
}

VerificationFn NeighborVf(const std::string& relation_id,
                          const Registry& registry) {
  const ChildVf* rel = registry.FindChildVf("neighbor:" + relation_id);
  if (rel == nullptr) {
    throw std::invalid_argument("NeighborVf: unknown relation " + relation_id);
  }
  return SuitableAnd("neighbor:" + relation_id, registry,
                     [rel = *rel](const ParsedSequence& ps,
                                  const std::vector<Message>&) {
                       for (const PairSeq& pairs : ps.child_pairs) {
                         if (!rel.accepts(pairs)) return false;
                       }
                       return true;
                     });
}

ChildVf TrueChildVf() {
  return {"true", [](const PairSeq&) { return true; }};
}

ChildVf RrSingleChildVf() {
  return {"rr_single", [](const PairSeq& pairs) {
            return pairs.size() <= 1 && AllBits(pairs);
          }};
}

ChildVf MDeltaGChildVf() {
  return {"m_delta_g", [](const PairSeq& pairs) {
            return pairs.size() <= 2 && AllBits(pairs) &&
                   CountDiffering(pairs) <= 1;
          }};
}

ChildVf IrrQueriesChildVf() {
  return {"irr_queries", [](const PairSeq& pairs) {
            for (const auto& [a, b] : pairs) {
              if (a != Value(0) || b != Value(0)) return false;
            }
            return true;
          }};
}

ChildVf LaplaceSingleChildVf() {
  return {"laplace_single", [](const PairSeq& pairs) {
            if (pairs.size() > 1) return false;
            for (const auto& [a, b] : pairs) {
              if (!a.IsInt() || !b.IsInt()) return false;
              if (std::llabs(a.AsInt() - b.AsInt()) > 1) return false;
            }
            return true;
          }};
}

ChildVf NeighborEventChildVf() {
  return {"neighbor:event", [](const PairSeq& pairs) {
            size_t differing = 0;
            for (const auto& [a, b] : pairs) {
              if (!a.IsInt() || !b.IsInt()) return false;
              if (a == b) continue;
              if (std::llabs(a.AsInt() - b.AsInt()) > 1) return false;
              ++differing;
            }
            return differing <= 1;
          }};
}

ChildVf NeighborEvent01ChildVf() {
  return {"neighbor:event01", [](const PairSeq& pairs) {
            size_t differing = 0;
            for (const auto& [a, b] : pairs) {
              const ValueList* xa = nullptr;
              const ValueList* xb = nullptr;
              const Value* ta = nullptr;
              const Value* tb = nullptr;
              if (!SplitEvent01(a, &xa, &ta) || !SplitEvent01(b, &xb, &tb)) {
                return false;
              }
              if ((ta == nullptr) != (tb == nullptr)) return false;
              if (ta != nullptr && *ta != *tb) return false;
              if (xa->size() != xb->size()) return false;
              if (*xa != *xb) ++differing;
            }
            return differing <= 1;
          }};
}

ChildVf NeighborLinf1ChildVf() {
  return {"neighbor:linf1", [](const PairSeq& pairs) {
            size_t differing = 0;
            for (const auto& [a, b] : pairs) {
              if (!IsIntVector(a) || !IsIntVector(b)) return false;
              const ValueList& xa = a.AsList();
              const ValueList& xb = b.AsList();
              if (xa.size() != xb.size()) return false;
              if (xa == xb) continue;
              for (size_t k = 0; k < xa.size(); ++k) {
                if (std::llabs(xa[k].AsInt() - xb[k].AsInt()) > 1) {
                  return false;
                }
              }
              ++differing;
            }
            return differing <= 1;
          }};
}

namespace {

class IdentifierIpm final : public Ipm {
 public:
  explicit IdentifierIpm(int b) : b_(b) {}

  IpmPtr Clone() const override {
    return std::make_unique<IdentifierIpm>(*this);
  }

  std::vector<IpmBranch> EnumerateStep(Side in_side,
                                       const Message& input) const override {
    std::vector<IpmBranch> out;
    if (in_side == Side::kRight) {
      out.push_back({Rational(1), Side::kLeft, input, Clone()});
      return out;
    }
    if (!input.IsPair()) {
      out.push_back({Rational(1), Side::kLeft, Message::Halt(), Clone()});
      return out;
    }
    const Value& picked = input.payload.AsList()[static_cast<size_t>(b_)];
    Message fwd = picked.IsCreation()
                      ? Message{MessageKind::kCreationQuery, picked}
                      : Message::Query(picked);
    out.push_back({Rational(1), Side::kRight, std::move(fwd), Clone()});
    return out;
  }

  std::string DebugName() const override { return "identifier"; }

 private:
  int b_;
};

class VerifierIpm final : public Ipm {
 public:
  explicit VerifierIpm(VerificationFn f) : f_(std::move(f)) {}

  IpmPtr Clone() const override { return std::make_unique<VerifierIpm>(*this); }

  std::vector<IpmBranch> EnumerateStep(Side in_side,
                                       const Message& input) const override {
    std::vector<IpmBranch> out;
    if (in_side == Side::kRight) {
      out.push_back({Rational(1), Side::kLeft, input, Clone()});
      return out;
    }
    auto next = std::make_unique<VerifierIpm>(*this);
    next->history_.push_back(input);
    const bool pass = f_.accepts(next->history_);
    out.push_back({Rational(1), pass ? Side::kRight : Side::kLeft,
                   pass ? input : Message::Halt(), std::move(next)});
    return out;
  }

  std::string DebugName() const override { return "verifier:" + f_.id; }

 private:
  VerificationFn f_;
  std::vector<Message> history_;
};

}  // namespace

IpmHandle MakeIdentifier(int b) {
  if (b != 0 && b != 1) {
    throw std::invalid_argument("MakeIdentifier: bit must be 0 or 1");
  }
  return IpmHandle(std::make_unique<IdentifierIpm>(b));
}

IpmHandle MakeVerifier(VerificationFn f) {
  return IpmHandle(std::make_unique<VerifierIpm>(std::move(f)));
}

}  // namespace dplab
