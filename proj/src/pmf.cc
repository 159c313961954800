#include "dplab/pmf.h"

#include <stdexcept>

namespace dplab {

void DiscretePmf::Add(const Value& outcome, const Rational& mass) {
  if (mass < 0) throw std::invalid_argument("DiscretePmf: negative mass");
  if (mass == 0) return;
  mass_[outcome] += mass;
}

const Rational& DiscretePmf::Mass(const Value& outcome) const {
  static const Rational kZero(0);
  auto it = mass_.find(outcome);
  return it == mass_.end() ? kZero : it->second;
}

Rational DiscretePmf::Total() const {
  Rational t(0);
  for (const auto& [_, m] : mass_) t += m;
  return t;
}

Rational DiscretePmf::MaxAbsDiff(const DiscretePmf& a, const DiscretePmf& b) {
  Rational worst(0);
  for (const auto& [k, m] : a.mass_) {
    Rational d = Abs(m - b.Mass(k));
    if (d > worst) worst = d;
  }
  for (const auto& [k, m] : b.mass_) {
    if (a.mass_.count(k)) continue;
    if (m > worst) worst = m;
  }
  return worst;
}

DiscretePmf DiscretePmf::Product(const DiscretePmf& a, const DiscretePmf& b) {
  DiscretePmf out;
  for (const auto& [x, mx] : a.mass_) {
    for (const auto& [y, my] : b.mass_) {
      out.Add(Value::Pair(x, y), mx * my);
    }
  }
  return out;
}

std::string DiscretePmf::ToString() const {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, m] : mass_) {
    if (!first) out += ", ";
    first = false;
    out += k.ToString() + ": " + dplab::ToString(m);
  }
  return out + "}";
}

namespace {

// One-directional hockey-stick sum over the union of supports. Outcomes
// absent from a PMF carry zero mass, so the common universe is implicit.
Rational OneSided(const DiscretePmf& p, const DiscretePmf& q,
                  const Rational& e_eps) {
  Rational total(0);
  for (const auto& [k, m] : p.Entries()) {
    Rational gap = m - e_eps * q.Mass(k);
    if (gap > 0) total += gap;
  }
  return total;
}

}  // namespace

Rational HockeyStickDelta(const DiscretePmf& p0, const DiscretePmf& p1,
                          const Rational& e_eps) {
  if (e_eps < 1) {
    throw std::invalid_argument("HockeyStickDelta: e_eps must be >= 1");
  }
  Rational a = OneSided(p0, p1, e_eps);
  Rational b = OneSided(p1, p0, e_eps);
  return a > b ? a : b;
}

Rational TvDistance(const DiscretePmf& p0, const DiscretePmf& p1) {
  return HockeyStickDelta(p0, p1, Rational(1));
}

}  // namespace dplab
