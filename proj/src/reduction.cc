#include "dplab/reduction.h"

#include <algorithm>
#include <set>
#include <utility>

#include "dplab/mechanisms/randomized_response.h"

namespace dplab {
namespace {

// a*x + b*y <= c.
struct HalfPlane {
  Rational a, b, c;
};
using Point = std::pair<Rational, Rational>;

// All feasible pairwise boundary intersections. The constraint systems below
// always bound both coordinates from above and below, so the feasible region
// is a polygon and its optimum sits on a vertex.
std::vector<Point> Vertices(const std::vector<HalfPlane>& hp) {
  std::vector<Point> out;
  for (size_t i = 0; i < hp.size(); ++i) {
    for (size_t j = i + 1; j < hp.size(); ++j) {
      Rational det = hp[i].a * hp[j].b - hp[j].a * hp[i].b;
      if (det == 0) continue;
      Point p{Rational((hp[i].c * hp[j].b - hp[j].c * hp[i].b) / det),
              Rational((hp[i].a * hp[j].c - hp[j].a * hp[i].c) / det)};
      bool feasible = true;
      for (const auto& h : hp) {
        if (h.a * p.first + h.b * p.second > h.c) {
          feasible = false;
          break;
        }
      }
      if (feasible) out.push_back(std::move(p));
    }
  }
  return out;
}

Point LexMax(const std::vector<HalfPlane>& hp) {
  auto feas = Vertices(hp);
  if (feas.empty()) {
    throw std::runtime_error(
        "empty feasible region in constraint maximization; the answer table "
        "is not DP at the given (e_eps, delta)");
  }
  return *std::max_element(feas.begin(), feas.end());
}

// Largest z with (z, z) feasible.
std::optional<Rational> DiagMax(const std::vector<HalfPlane>& hp) {
  std::optional<Rational> hi, lo;
  for (const auto& h : hp) {
    Rational s = h.a + h.b;
    if (s > 0) {
      Rational v = Rational(h.c / s);
      hi = hi ? std::min(*hi, v) : v;
    } else if (s < 0) {
      Rational v = Rational(h.c / s);
      lo = lo ? std::max(*lo, v) : v;
    } else if (h.c < 0) {
      return std::nullopt;
    }
  }
  if (!hi) return std::nullopt;
  if (lo && *lo > *hi) return std::nullopt;
  return hi;
}

// Maximal equal-coordinate point when it is undominated, else the
// lexicographic maximum.
Point PhiSelect(std::vector<HalfPlane> hp) {
  Point lex = LexMax(hp);
  auto z = DiagMax(hp);
  if (!z) return lex;
  hp.push_back({Rational(-1), Rational(0), Rational(-*z)});
  hp.push_back({Rational(0), Rational(-1), Rational(-*z)});
  bool any = false;
  Rational best;
  for (const auto& p : Vertices(hp)) {
    Rational s = p.first + p.second;
    if (!any || s > best) {
      best = s;
      any = true;
    }
  }
  if (any && best > 2 * *z) return lex;
  return {*z, *z};
}

HalfPlane AtMost(int b, Rational cap) {
  return b == 0 ? HalfPlane{Rational(1), Rational(0), std::move(cap)}
                : HalfPlane{Rational(0), Rational(1), std::move(cap)};
}

HalfPlane AtLeast(int b, const Rational& floor) {
  return b == 0 ? HalfPlane{Rational(-1), Rational(0), Rational(-floor)}
                : HalfPlane{Rational(0), Rational(-1), Rational(-floor)};
}

struct LawEntry {
  Rational prob;
  MechanismHandle next;
};

// Branches of `state` on `q`, merged by answer. Only a Halt answer may
// appear on several branches (the successors coincide); any other duplicate
// is a mechanism bug.
std::map<Message, LawEntry> StepLawOf(const MechanismHandle& state,
                                      const Message& q) {
  std::map<Message, LawEntry> law;
  Rational total = 0;
  for (auto& br : state.EnumerateStep(q)) {
    if (br.prob == 0) continue;
    total += br.prob;
    auto [it, inserted] = law.try_emplace(
        br.answer, LawEntry{br.prob, MechanismHandle(std::move(br.next))});
    if (!inserted) {
      if (!br.answer.IsHalt()) {
        throw std::logic_error("duplicate branch answer " +
                               br.answer.ToString());
      }
      it->second.prob += br.prob;
    }
  }
  if (total != 1) {
    throw std::logic_error("branch probabilities sum to " + ToString(total));
  }
  return law;
}

void DiscoverAnswers(const MechanismHandle& state,
                     const std::vector<Message>& queries, int64_t depth,
                     int64_t horizon, std::set<Message>& answers) {
  if (depth == horizon) {
    for (const auto& q : queries) {
      for (const auto& br : state.EnumerateStep(q)) {
        if (br.prob != 0 && !br.answer.IsHalt()) {
          throw std::runtime_error("mechanism still answers " +
                                   br.answer.ToString() +
                                   " after the horizon");
        }
      }
    }
    return;
  }
  for (const auto& q : queries) {
    for (auto& [answer, entry] : StepLawOf(state, q)) {
      answers.insert(answer);
      DiscoverAnswers(entry.next, queries, depth + 1, horizon, answers);
    }
  }
}

void FillMu(const MechanismHandle& state, int b, int64_t depth, int64_t node,
            const Rational& mass, const std::map<Message, size_t>& answer_ix,
            AnswerTable& tb) {
  if (depth == tb.horizon) return;
  for (size_t q = 0; q < tb.queries.size(); ++q) {
    for (auto& [answer, entry] : StepLawOf(state, tb.queries[q])) {
      const int64_t child = tb.Child(node, q, answer_ix.at(answer));
      Rational m = mass * entry.prob;
      tb.mu[b][depth + 1][child] = m;
      FillMu(entry.next, b, depth + 1, child, m, answer_ix, tb);
    }
  }
}

// Per-answer conditional masses of `tab` below (h, q); nullopt when the
// parent mass is zero. t is the child depth.
std::optional<std::vector<Rational>> FamilyAt(const AnswerTable& mu,
                                              const LevelTable& tab,
                                              int64_t t, int64_t h, size_t q) {
  const Rational& den = tab[t - 1][h];
  if (den == 0) return std::nullopt;
  std::vector<Rational> out(mu.answers.size());
  for (size_t a = 0; a < mu.answers.size(); ++a) {
    out[a] = Rational(tab[t][mu.Child(h, q, a)] / den);
  }
  return out;
}

}  // namespace

int64_t AnswerTable::LevelSize(int64_t t) const {
  int64_t size = 1;
  for (int64_t i = 0; i < t; ++i) {
    size *= static_cast<int64_t>(queries.size() * answers.size());
  }
  return size;
}

Rational AnswerTable::MaxChainResidual() const {
  Rational worst = 0;
  for (int b : {0, 1}) {
    for (int64_t t = 1; t <= horizon; ++t) {
      for (int64_t h = 0; h < LevelSize(t - 1); ++h) {
        for (size_t q = 0; q < queries.size(); ++q) {
          Rational sum = 0;
          for (size_t a = 0; a < answers.size(); ++a) {
            sum += mu[b][t][Child(h, q, a)];
          }
          worst = std::max(worst, Abs(sum - mu[b][t - 1][h]));
        }
      }
    }
  }
  return worst;
}

AnswerTable ComputeMu(const MechanismHandle& m0, const MechanismHandle& m1,
                      const std::vector<Message>& queries, int64_t horizon) {
  if (queries.empty()) throw std::invalid_argument("empty query set");
  if (horizon < 1) throw std::invalid_argument("horizon must be positive");
  if (!m0.Valid() || !m1.Valid() || !m0.SupportsEnumeration() ||
      !m1.SupportsEnumeration()) {
    throw std::invalid_argument("answer tables need two enumerable inputs");
  }
  std::set<Message> discovered;
  DiscoverAnswers(m0, queries, 0, horizon, discovered);
  DiscoverAnswers(m1, queries, 0, horizon, discovered);

  AnswerTable tb;
  tb.queries = queries;
  tb.answers.assign(discovered.begin(), discovered.end());
  tb.horizon = horizon;
  std::map<Message, size_t> answer_ix;
  for (size_t a = 0; a < tb.answers.size(); ++a) answer_ix[tb.answers[a]] = a;
  for (int b : {0, 1}) {
    tb.mu[b].resize(horizon + 1);
    for (int64_t t = 0; t <= horizon; ++t) {
      tb.mu[b][t].assign(tb.LevelSize(t), Rational(0));
    }
    tb.mu[b][0][0] = 1;
  }
  FillMu(m0, 0, 0, 0, Rational(1), answer_ix, tb);
  FillMu(m1, 1, 0, 0, Rational(1), answer_ix, tb);
  return tb;
}

AnswerTable ComputeMuFromLaw(std::vector<Message> queries,
                             std::vector<Message> answers, int64_t horizon,
                             const StepLaw& law) {
  if (queries.empty() || answers.empty()) {
    throw std::invalid_argument("empty query or answer set");
  }
  if (horizon < 1) throw std::invalid_argument("horizon must be positive");
  AnswerTable tb;
  tb.queries = std::move(queries);
  tb.answers = std::move(answers);
  tb.horizon = horizon;
  for (int b : {0, 1}) {
    tb.mu[b].resize(horizon + 1);
    tb.mu[b][0].assign(1, Rational(1));
    for (int64_t t = 1; t <= horizon; ++t) {
      tb.mu[b][t].assign(tb.LevelSize(t), Rational(0));
      for (int64_t h = 0; h < tb.LevelSize(t - 1); ++h) {
        for (size_t q = 0; q < tb.queries.size(); ++q) {
          auto step = law(b, t, h, q);
          Rational total = 0;
          for (const auto& [a, p] : step) {
            if (a >= tb.answers.size()) {
              throw std::invalid_argument("law answer index out of range");
            }
            if (p < 0) throw std::invalid_argument("negative law mass");
            total += p;
            tb.mu[b][t][tb.Child(h, q, a)] =
                Rational(tb.mu[b][t - 1][h] * p);
          }
          if (total != 1) {
            throw std::invalid_argument("law masses sum to " +
                                        ToString(total));
          }
        }
      }
    }
  }
  return tb;
}

ControlTables ComputeL(const AnswerTable& mu, const Rational& e_eps,
                       int64_t T) {
  if (T < 1 || T > mu.horizon) {
    throw std::invalid_argument("cutoff outside [1, horizon]");
  }
  if (e_eps <= 1) throw std::invalid_argument("e_eps must exceed 1");
  ControlTables out;
  out.cutoff = T;
  const size_t Q = mu.queries.size();
  const size_t A = mu.answers.size();
  for (int b : {0, 1}) {
    out.l[b].resize(T + 1);
    out.lower[b].resize(T + 1);
    out.l[b][T].resize(mu.LevelSize(T));
    for (int64_t h = 0; h < mu.LevelSize(T); ++h) {
      out.l[b][T][h] =
          std::max(Rational(0), Rational(mu.mu[b][T][h] -
                                         e_eps * mu.mu[1 - b][T][h]));
    }
    for (int64_t t = T - 1; t >= 0; --t) {
      const int64_t parents = mu.LevelSize(t);
      out.lower[b][t + 1].assign(parents * static_cast<int64_t>(Q),
                                 Rational(0));
      out.l[b][t].assign(parents, Rational(0));
      for (int64_t h = 0; h < parents; ++h) {
        Rational best = 0;
        for (size_t q = 0; q < Q; ++q) {
          Rational sum = 0;
          for (size_t a = 0; a < A; ++a) {
            sum += out.l[b][t + 1][mu.Child(h, q, a)];
          }
          out.lower[b][t + 1][h * static_cast<int64_t>(Q) +
                              static_cast<int64_t>(q)] = sum;
          if (q == 0 || sum > best) best = sum;
        }
        out.l[b][t][h] = best;
      }
    }
  }
  return out;
}

ConstraintTables ComputeXiPhi(const AnswerTable& mu,
                              const ControlTables& control,
                              const Rational& e_eps, const Rational& delta) {
  if (delta < 0 || delta > 1) {
    throw std::invalid_argument("delta outside [0, 1]");
  }
  const int64_t T = control.cutoff;
  const size_t Q = mu.queries.size();
  const size_t A = mu.answers.size();
  const Rational c = Rational(1) / e_eps;

  ConstraintTables out;
  for (int b : {0, 1}) {
    out.xi[b].resize(T + 1);
    out.phi[b].resize(T + 1);
    out.xi[b][0].assign(1, Rational(0));
    out.phi[b][0].assign(1, Rational(1));
    for (int64_t t = 1; t <= T; ++t) {
      out.xi[b][t].assign(mu.LevelSize(t), Rational(0));
      out.phi[b][t].assign(mu.LevelSize(t), Rational(0));
    }
  }

  for (int64_t t = 1; t <= T; ++t) {
    for (int64_t h = 0; h < mu.LevelSize(t - 1); ++h) {
      for (size_t q = 0; q < Q; ++q) {
        std::array<std::vector<Rational>, 2> murow, lrow;
        for (int b : {0, 1}) {
          murow[b].resize(A);
          lrow[b].resize(A);
          for (size_t a = 0; a < A; ++a) {
            const int64_t ch = mu.Child(h, q, a);
            murow[b][a] = mu.mu[b][t][ch];
            lrow[b][a] = control.l[b][t][ch];
          }
        }

        std::array<Rational, 2> tail_l = {Rational(0), Rational(0)};
        for (int b : {0, 1}) {
          for (size_t a = 0; a < A; ++a) tail_l[b] += lrow[b][a];
        }
        std::array<Rational, 2> used_xi = {Rational(0), Rational(0)};
        std::vector<std::array<Rational, 2>> xrow(A);
        for (size_t a = 0; a < A; ++a) {
          for (int b : {0, 1}) tail_l[b] -= lrow[b][a];
          if (delta == 0) {
            if (lrow[0][a] != 0 || lrow[1][a] != 0) {
              throw std::runtime_error(
                  "control table positive at delta = 0; the law is not "
                  "pure-DP at this e_eps");
            }
            xrow[a] = {Rational(0), Rational(0)};
          } else {
            std::vector<HalfPlane> hp;
            for (int b : {0, 1}) {
              Rational cap2 = Rational(delta * out.phi[b][t - 1][h] -
                                       used_xi[b] - tail_l[b]);
              Rational cap4 =
                  std::min(murow[b][a], Rational(lrow[0][a] + lrow[1][a]));
              hp.push_back(AtLeast(b, lrow[b][a]));
              hp.push_back(AtMost(b, std::move(cap2)));
              hp.push_back(AtMost(b, std::min(cap4, Rational(1))));
            }
            hp.push_back({Rational(1), Rational(-c),
                          Rational(murow[0][a] - c * murow[1][a])});
            hp.push_back({Rational(-c), Rational(1),
                          Rational(murow[1][a] - c * murow[0][a])});
            Point p = LexMax(hp);
            xrow[a] = {p.first, p.second};
          }
          used_xi[0] += xrow[a][0];
          used_xi[1] += xrow[a][1];
          const int64_t ch = mu.Child(h, q, a);
          out.xi[0][t][ch] = xrow[a][0];
          out.xi[1][t][ch] = xrow[a][1];
        }

        std::array<Rational, 2> tail_xi = {Rational(0), Rational(0)};
        for (int b : {0, 1}) {
          for (size_t a = 0; a < A; ++a) tail_xi[b] += xrow[a][b];
        }
        std::array<Rational, 2> used_phi = {Rational(0), Rational(0)};
        for (size_t a = 0; a < A; ++a) {
          for (int b : {0, 1}) tail_xi[b] -= xrow[a][b];
          std::vector<HalfPlane> hp;
          for (int b : {0, 1}) {
            Rational low = 0, tail = 0;
            if (delta != 0) {
              low = Rational(xrow[a][b] / delta);
              tail = Rational(tail_xi[b] / delta);
            }
            Rational cap2 =
                Rational(out.phi[b][t - 1][h] - used_phi[b] - tail);
            hp.push_back(AtLeast(b, low));
            hp.push_back(AtMost(b, std::move(cap2)));
            hp.push_back(AtMost(b, Rational(1)));
            hp.push_back(AtLeast(b, Rational(0)));
          }
          if (delta == 0) {
            if (murow[0][a] - c * murow[1][a] < 0 ||
                murow[1][a] - c * murow[0][a] < 0) {
              throw std::runtime_error(
                  "law violates pure DP at this e_eps (delta = 0)");
            }
          } else {
            hp.push_back({delta, Rational(-c * delta),
                          Rational(murow[0][a] - c * murow[1][a])});
            hp.push_back({Rational(-c * delta), delta,
                          Rational(murow[1][a] - c * murow[0][a])});
          }
          Point p = PhiSelect(std::move(hp));
          used_phi[0] += p.first;
          used_phi[1] += p.second;
          const int64_t ch = mu.Child(h, q, a);
          out.phi[0][t][ch] = p.first;
          out.phi[1][t][ch] = p.second;
        }
      }
    }
  }
  return out;
}

PairedTables ComputePsi(const AnswerTable& mu, const PairedTables& phi,
                        const Rational& e_eps, const Rational& delta) {
  const int64_t T = static_cast<int64_t>(phi[0].size()) - 1;
  PairedTables psi;
  if (delta == 1) {
    psi = phi;
    return psi;
  }
  if (e_eps <= 1) {
    throw std::invalid_argument(
        "private-branch table needs e_eps > 1 when delta < 1");
  }
  const Rational denom = Rational((1 - delta) * (e_eps - 1));
  for (int b : {0, 1}) {
    psi[b].resize(T + 1);
    psi[b][0].assign(1, Rational(1));
  }
  for (int64_t t = 1; t <= T; ++t) {
    for (int b : {0, 1}) psi[b][t].resize(mu.LevelSize(t));
    for (int64_t h = 0; h < mu.LevelSize(t); ++h) {
      for (int b : {0, 1}) {
        Rational num = Rational(e_eps * mu.mu[b][t][h] -
                                delta * e_eps * phi[b][t][h] -
                                mu.mu[1 - b][t][h] + delta * phi[1 - b][t][h]);
        psi[b][t][h] = Rational(num / denom);
      }
    }
  }
  return psi;
}

ReductionBundle ComputeReduction(const AnswerTable& mu, const Rational& e_eps,
                                 std::optional<Rational> delta) {
  ReductionBundle out;
  out.e_eps = e_eps;
  out.control = ComputeL(mu, e_eps, mu.horizon);
  out.delta =
      delta ? *delta : std::max(out.control.l[0][0][0], out.control.l[1][0][0]);
  out.constraints = ComputeXiPhi(mu, out.control, e_eps, out.delta);
  out.psi = ComputePsi(mu, out.constraints.phi, e_eps, out.delta);
  return out;
}

Rational ReductionReport::Max() const {
  Rational m = chain_residual;
  for (const Rational* r :
       {&dominance_violation, &budget_floor_violation, &dp_gap_violation,
        &phi_range_violation, &psi_negativity, &phi_chain_residual,
        &psi_chain_residual, &symmetric_floor_violation, &mixture_residual}) {
    m = std::max(m, *r);
  }
  return m;
}

ReductionReport VerifyReduction(const AnswerTable& mu,
                                const ReductionBundle& tables) {
  const int64_t T = tables.control.cutoff;
  const size_t Q = mu.queries.size();
  const size_t A = mu.answers.size();
  const Rational& delta = tables.delta;
  const Rational c = Rational(1) / tables.e_eps;
  const auto& l = tables.control.l;
  const auto& lower = tables.control.lower;
  const auto& phi = tables.constraints.phi;
  const auto& psi = tables.psi;
  ReductionReport rep;
  auto bump = [](Rational& worst, const Rational& v) {
    if (v > worst) worst = v;
  };

  rep.chain_residual = mu.MaxChainResidual();

  for (int b : {0, 1}) {
    // backward dominance of the control tables
    for (int64_t t = 1; t <= T; ++t) {
      for (int64_t h = 0; h < mu.LevelSize(t - 1); ++h) {
        for (size_t q = 0; q < Q; ++q) {
          bump(rep.dominance_violation,
               Rational(lower[b][t][h * static_cast<int64_t>(Q) +
                                    static_cast<int64_t>(q)] -
                        l[b][t - 1][h]));
        }
      }
    }
    // pointwise conditions on every depth
    for (int64_t t = 0; t <= T; ++t) {
      for (int64_t h = 0; h < mu.LevelSize(t); ++h) {
        bump(rep.budget_floor_violation,
             Rational(l[b][t][h] - delta * phi[b][t][h]));
        Rational lhs =
            Rational(delta * phi[b][t][h] - c * delta * phi[1 - b][t][h]);
        Rational rhs = Rational(mu.mu[b][t][h] - c * mu.mu[1 - b][t][h]);
        bump(rep.dp_gap_violation, Rational(lhs - rhs));
        bump(rep.phi_range_violation, Rational(-phi[b][t][h]));
        bump(rep.phi_range_violation, Rational(phi[b][t][h] - 1));
        bump(rep.psi_negativity, Rational(-psi[b][t][h]));
        Rational mix = Rational(
            delta * phi[b][t][h] +
            (1 - delta) * (tables.e_eps / (1 + tables.e_eps)) * psi[b][t][h] +
            (1 - delta) * (Rational(1) / (1 + tables.e_eps)) *
                psi[1 - b][t][h]);
        bump(rep.mixture_residual, Abs(mix - mu.mu[b][t][h]));
      }
    }
    // chain identities of both allocation tables
    for (int64_t t = 1; t <= T; ++t) {
      for (int64_t h = 0; h < mu.LevelSize(t - 1); ++h) {
        for (size_t q = 0; q < Q; ++q) {
          Rational phi_sum = 0, psi_sum = 0;
          for (size_t a = 0; a < A; ++a) {
            phi_sum += phi[b][t][mu.Child(h, q, a)];
            psi_sum += psi[b][t][mu.Child(h, q, a)];
          }
          bump(rep.phi_chain_residual, Abs(phi_sum - phi[b][t - 1][h]));
          bump(rep.psi_chain_residual, Abs(psi_sum - psi[b][t - 1][h]));
        }
      }
    }
  }

  // query sequences whose two answer laws coincide: phi must be symmetric
  // and dominate min{mu, l^0 + l^1}
  for (int64_t t = 1; t <= T; ++t) {
    std::vector<size_t> qs(t, 0);
    while (true) {
      std::vector<int64_t> nodes;
      std::vector<size_t> as(t, 0);
      while (true) {
        int64_t node = 0;
        for (int64_t i = 0; i < t; ++i) node = mu.Child(node, qs[i], as[i]);
        nodes.push_back(node);
        int64_t i = t - 1;
        while (i >= 0 && ++as[i] == A) as[i--] = 0;
        if (i < 0) break;
      }
      bool identical = true;
      for (int64_t node : nodes) {
        if (mu.mu[0][t][node] != mu.mu[1][t][node]) {
          identical = false;
          break;
        }
      }
      if (identical) {
        for (int64_t node : nodes) {
          bump(rep.symmetric_floor_violation,
               Abs(phi[0][t][node] - phi[1][t][node]));
          Rational floor = std::min(
              mu.mu[0][t][node], Rational(l[0][t][node] + l[1][t][node]));
          bump(rep.symmetric_floor_violation,
               Rational(floor - phi[0][t][node]));
        }
      }
      int64_t i = t - 1;
      while (i >= 0 && ++qs[i] == Q) qs[i--] = 0;
      if (i < 0) break;
    }
  }

  // violations are positive parts; clamp the negatives accumulated above
  for (Rational* r :
       {&rep.dominance_violation, &rep.budget_floor_violation,
        &rep.dp_gap_violation, &rep.phi_range_violation, &rep.psi_negativity,
        &rep.symmetric_floor_violation}) {
    if (*r < 0) *r = 0;
  }
  return rep;
}

InteractionProfile AnalyzeInteractions(const AnswerTable& mu,
                                       const ReductionBundle& tables,
                                       const std::vector<size_t>& query_seq) {
  if (static_cast<int64_t>(query_seq.size()) > tables.control.cutoff) {
    throw std::invalid_argument("query sequence longer than the cutoff");
  }
  for (size_t q : query_seq) {
    if (q >= mu.queries.size()) {
      throw std::invalid_argument("query index out of range");
    }
  }
  InteractionProfile profile;
  const auto& phi = tables.constraints.phi;
  const auto& psi = tables.psi;
  for (int branch : {0, 1}) {  // 0: exposed walks phi, 1: private walks psi
    const PairedTables& own = branch == 0 ? phi : psi;
    bool hit = false;
    std::vector<int64_t> frontier = {0};
    for (size_t step = 0; step < query_seq.size(); ++step) {
      const int64_t t = static_cast<int64_t>(step) + 1;
      const size_t q = query_seq[step];
      std::vector<int64_t> next;
      for (int64_t h : frontier) {
        auto e0 = FamilyAt(mu, phi[0], t, h, q);
        auto e1 = FamilyAt(mu, phi[1], t, h, q);
        auto p0 = FamilyAt(mu, psi[0], t, h, q);
        auto p1 = FamilyAt(mu, psi[1], t, h, q);
        if (e0 != e1 || p0 != p1) {
          hit = true;
          continue;  // the relay pins its family here; nothing below differs
        }
        for (size_t a = 0; a < mu.answers.size(); ++a) {
          const int64_t ch = mu.Child(h, q, a);
          if (own[0][t][ch] > 0 || own[1][t][ch] > 0) next.push_back(ch);
        }
      }
      frontier = std::move(next);
    }
    (branch == 0 ? profile.exposed_second : profile.private_second) = hit;
  }
  return profile;
}

namespace {

// Relay between the adversary (left) and irr (right). It buys the flag with
// the first right request and the bit with a second request issued at the
// first transcript whose two per-input families disagree; everything else is
// sampled from the flag's allocation table.
class IrrPostprocessor final : public Ipm {
 public:
  IrrPostprocessor(std::shared_ptr<const AnswerTable> mu,
                   std::shared_ptr<const ReductionBundle> tables,
                   std::shared_ptr<int64_t> requests)
      : mu_(std::move(mu)),
        tables_(std::move(tables)),
        requests_(std::move(requests)) {}

  IpmPtr Clone() const override {
    return std::make_unique<IrrPostprocessor>(*this);
  }

  std::vector<IpmBranch> EnumerateStep(Side side,
                                       const Message& input) const override {
    if (phase_ == Phase::kHalted || input.IsHalt()) return HaltOut();
    if (side == Side::kLeft) {
      if (phase_ != Phase::kIdle || t_ == mu_->horizon) return HaltOut();
      auto q = QueryIndex(input);
      if (!q) return HaltOut();
      if (!flag_) return RequestIrr(Phase::kAwaitFlag, *q);
      return Proceed(*q);
    }
    if (phase_ == Phase::kAwaitFlag && input.kind == MessageKind::kAnswer &&
        input.payload.IsRrFlag()) {
      IrrPostprocessor with_flag(*this);
      with_flag.flag_ = input.payload.AsRrFlag();
      with_flag.phase_ = Phase::kIdle;
      return with_flag.Proceed(pending_q_);
    }
    if (phase_ == Phase::kAwaitBit && input.kind == MessageKind::kAnswer &&
        input.payload.IsBit()) {
      IrrPostprocessor with_bit(*this);
      with_bit.bit_ = static_cast<int>(input.payload.AsInt());
      with_bit.phase_ = Phase::kIdle;
      return with_bit.SampleBranches(pending_q_);
    }
    return HaltOut();
  }

  std::string DebugName() const override { return "irr_postprocessor"; }
  std::string RightSpaceId() const override { return "irr"; }

 private:
  enum class Phase { kIdle, kAwaitFlag, kAwaitBit, kHalted };

  std::optional<size_t> QueryIndex(const Message& m) const {
    for (size_t q = 0; q < mu_->queries.size(); ++q) {
      if (mu_->queries[q] == m) return q;
    }
    return std::nullopt;
  }

  std::vector<IpmBranch> HaltOut() const {
    auto succ = std::make_unique<IrrPostprocessor>(*this);
    succ->phase_ = Phase::kHalted;
    std::vector<IpmBranch> out;
    out.push_back(
        {Rational(1), Side::kLeft, Message::Halt(), std::move(succ)});
    return out;
  }

  std::vector<IpmBranch> RequestIrr(Phase await, size_t q) const {
    if (requests_) ++*requests_;
    auto succ = std::make_unique<IrrPostprocessor>(*this);
    succ->phase_ = await;
    succ->pending_q_ = q;
    std::vector<IpmBranch> out;
    out.push_back({Rational(1), Side::kRight, IrrQuery(), std::move(succ)});
    return out;
  }

  bool FamiliesDiffer(size_t q) const {
    const auto& phi = tables_->constraints.phi;
    const auto& psi = tables_->psi;
    const int64_t t = t_ + 1;
    return FamilyAt(*mu_, phi[0], t, node_, q) !=
               FamilyAt(*mu_, phi[1], t, node_, q) ||
           FamilyAt(*mu_, psi[0], t, node_, q) !=
               FamilyAt(*mu_, psi[1], t, node_, q);
  }

  std::vector<IpmBranch> Proceed(size_t q) const {
    if (!bit_ && FamiliesDiffer(q)) return RequestIrr(Phase::kAwaitBit, q);
    return SampleBranches(q);
  }

  std::vector<IpmBranch> SampleBranches(size_t q) const {
    const PairedTables& own = *flag_ == RrFlag::kExposed
                                  ? tables_->constraints.phi
                                  : tables_->psi;
    const int b = bit_.value_or(0);
    const Rational& den = own[b][t_][node_];
    if (den == 0) {
      throw std::logic_error(
          "allocation table has zero mass on a reachable transcript");
    }
    std::vector<IpmBranch> out;
    for (size_t a = 0; a < mu_->answers.size(); ++a) {
      const int64_t child = mu_->Child(node_, q, a);
      const Rational& mass = own[b][t_ + 1][child];
      if (mass == 0) continue;
      auto succ = std::make_unique<IrrPostprocessor>(*this);
      succ->phase_ =
          mu_->answers[a].IsHalt() ? Phase::kHalted : Phase::kIdle;
      succ->t_ = t_ + 1;
      succ->node_ = child;
      out.push_back({Rational(mass / den), Side::kLeft, mu_->answers[a],
                     std::move(succ)});
    }
    if (out.empty()) {
      throw std::logic_error(
          "allocation table allots no answer mass on a reachable transcript");
    }
    return out;
  }

  std::shared_ptr<const AnswerTable> mu_;
  std::shared_ptr<const ReductionBundle> tables_;
  std::shared_ptr<int64_t> requests_;
  Phase phase_ = Phase::kIdle;
  int64_t t_ = 0;     // answered queries
  int64_t node_ = 0;  // transcript node at depth t_
  std::optional<RrFlag> flag_;
  std::optional<int> bit_;
  size_t pending_q_ = 0;
};

}  // namespace

IpmHandle BuildIrrPostprocessor(std::shared_ptr<const AnswerTable> mu,
                                std::shared_ptr<const ReductionBundle> tables,
                                std::shared_ptr<int64_t> irr_requests) {
  if (!mu || !tables) throw std::invalid_argument("missing tables");
  if (static_cast<int64_t>(tables->constraints.phi[0].size()) !=
      mu->horizon + 1) {
    throw std::invalid_argument("tables do not match the answer table depth");
  }
  return IpmHandle(std::make_unique<IrrPostprocessor>(
      std::move(mu), std::move(tables), std::move(irr_requests)));
}

}  // namespace dplab
