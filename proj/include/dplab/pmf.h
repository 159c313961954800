#ifndef DPLAB_PMF_H_
#define DPLAB_PMF_H_

#include <map>
#include <string>
#include <vector>

#include "dplab/rational.h"
#include "dplab/value.h"

namespace dplab {

// Finite probability mass function over Values, with exact rational masses.
// Double-precision views are derived at the boundary; all arithmetic
// (divergences, products, normalization checks) stays exact.
class DiscretePmf {
 public:
  DiscretePmf() = default;

  void Add(const Value& outcome, const Rational& mass);

  const Rational& Mass(const Value& outcome) const;  // 0 if absent
  const std::map<Value, Rational>& Entries() const { return mass_; }
  size_t SupportSize() const { return mass_.size(); }

  Rational Total() const;
  // True when Total() == 1 exactly.
  bool IsNormalized() const { return Total() == 1; }

  bool operator==(const DiscretePmf& o) const { return mass_ == o.mass_; }

  // Largest absolute mass difference over the union of supports.
  static Rational MaxAbsDiff(const DiscretePmf& a, const DiscretePmf& b);

  // Independent product: outcome Pair(x, y) with mass a(x) * b(y).
  static DiscretePmf Product(const DiscretePmf& a, const DiscretePmf& b);

  std::string ToString() const;

 private:
  std::map<Value, Rational> mass_;
};

// max over both directions of sum_x max(0, P_b(x) - e_eps * P_{1-b}(x)).
// e_eps is e^epsilon passed exactly; at e_eps = 1 this is total variation.
Rational HockeyStickDelta(const DiscretePmf& p0, const DiscretePmf& p1,
                          const Rational& e_eps);

Rational TvDistance(const DiscretePmf& p0, const DiscretePmf& p1);

}  // namespace dplab

#endif  // DPLAB_PMF_H_
