#ifndef DPLAB_VALUE_H_
#define DPLAB_VALUE_H_

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "dplab/rational.h"

namespace dplab {

// Top/bottom symbols used as acknowledgements, sparse-vector answers, and
// two-phase mechanism states.
enum class Flag : uint8_t { kTop, kBottom };

// Outcome flag of the randomized-response family. Exposed is always the
// delta-probability branch that reveals the input bit exactly; Private is the
// e^eps/(1+e^eps) randomized branch.
enum class RrFlag : uint8_t { kExposed, kPrivate };

class Value;
struct CreationQuery;
using ValueList = std::vector<Value>;
using CreationQueryPtr = std::shared_ptr<const CreationQuery>;

// Discrete message payload: unit, integer, symbol, exact rational, string id,
// nested list, or a creation-query record. Totally ordered (kind-major) so it
// can key maps; the order is structural, not semantic.
class Value {
 public:
  using Storage = std::variant<std::monostate, int64_t, Flag, RrFlag, Rational,
                               std::string, ValueList, CreationQueryPtr>;

  Value() : v_() {}
  Value(int64_t x) : v_(x) {}              // NOLINT(google-explicit-constructor)
  Value(int x) : v_(int64_t{x}) {}         // NOLINT(google-explicit-constructor)
  Value(Flag f) : v_(f) {}                 // NOLINT(google-explicit-constructor)
  Value(RrFlag f) : v_(f) {}               // NOLINT(google-explicit-constructor)
  Value(Rational r) : v_(std::move(r)) {}  // NOLINT(google-explicit-constructor)
  Value(std::string s) : v_(std::move(s)) {}  // NOLINT(google-explicit-constructor)
  Value(const char* s) : v_(std::string(s)) {}  // NOLINT(google-explicit-constructor)
  Value(ValueList xs) : v_(std::move(xs)) {}    // NOLINT(google-explicit-constructor)
  Value(CreationQueryPtr cq) : v_(std::move(cq)) {}  // NOLINT(google-explicit-constructor)

  static Value Unit() { return Value(); }
  static Value Pair(Value a, Value b) {
    return Value(ValueList{std::move(a), std::move(b)});
  }

  bool IsUnit() const { return std::holds_alternative<std::monostate>(v_); }
  bool IsInt() const { return std::holds_alternative<int64_t>(v_); }
  bool IsFlag() const { return std::holds_alternative<Flag>(v_); }
  bool IsRrFlag() const { return std::holds_alternative<RrFlag>(v_); }
  bool IsRational() const { return std::holds_alternative<Rational>(v_); }
  bool IsString() const { return std::holds_alternative<std::string>(v_); }
  bool IsList() const { return std::holds_alternative<ValueList>(v_); }
  bool IsCreation() const {
    return std::holds_alternative<CreationQueryPtr>(v_);
  }
  bool IsBit() const {
    return IsInt() && (AsInt() == 0 || AsInt() == 1);
  }

  int64_t AsInt() const { return std::get<int64_t>(v_); }
  Flag AsFlag() const { return std::get<Flag>(v_); }
  RrFlag AsRrFlag() const { return std::get<RrFlag>(v_); }
  const Rational& AsRational() const { return std::get<Rational>(v_); }
  const std::string& AsString() const { return std::get<std::string>(v_); }
  const ValueList& AsList() const { return std::get<ValueList>(v_); }
  const CreationQueryPtr& AsCreation() const {
    return std::get<CreationQueryPtr>(v_);
  }

  size_t KindIndex() const { return v_.index(); }

  bool operator==(const Value& other) const;
  bool operator!=(const Value& other) const { return !(*this == other); }
  bool operator<(const Value& other) const;

  // Compact single-line rendering, stable across runs; used for transcript
  // keys in serialized tables and reports.
  std::string ToString() const;

 private:
  Storage v_;
};

// Privacy parameters. The exact carriers (rho = e^epsilon and delta as
// rationals) drive all arithmetic; the doubles are display values. FromDouble
// converts the given doubles exactly, so double-constructed mechanisms are
// exact instances of *some* rational parameters.
struct PrivacyParams {
  double epsilon = 0.0;
  double delta = 0.0;
  Rational rho = 1;          // e^epsilon, >= 1
  Rational delta_exact = 0;  // in [0, 1]

  static PrivacyParams FromDouble(double epsilon, double delta);
  static PrivacyParams FromExact(Rational rho, Rational delta);

  bool SameExact(const PrivacyParams& o) const {
    return rho == o.rho && delta_exact == o.delta_exact;
  }
  bool operator==(const PrivacyParams& o) const { return SameExact(o); }
  bool operator<(const PrivacyParams& o) const {
    if (rho != o.rho) return rho < o.rho;
    return delta_exact < o.delta_exact;
  }
};

// Request to instantiate a child mechanism: constructor id, its (single)
// initial state, asserted privacy parameters, and the id of the verification
// function the assertion is relative to.
struct CreationQuery {
  std::string mech_id;
  Value init_state;
  PrivacyParams params;
  std::string vf_id;

  bool operator==(const CreationQuery& o) const;
  bool operator<(const CreationQuery& o) const;
  std::string ToString() const;
};

inline Value MakeCreationValue(CreationQuery cq) {
  return Value(std::make_shared<const CreationQuery>(std::move(cq)));
}

}  // namespace dplab

#endif  // DPLAB_VALUE_H_
