#include "dplab/value.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dplab/message.h"
#include "dplab/transcript.h"

namespace dplab {

Rational RationalFromDouble(double x) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("RationalFromDouble: non-finite input");
  }
  if (x == 0.0) return Rational(0);
  int exp = 0;
  double mant = std::frexp(x, &exp);  // x = mant * 2^exp, |mant| in [0.5, 1)
  // 53 doublings make the mantissa integral for any finite double.
  auto scaled = static_cast<int64_t>(std::ldexp(mant, 53));
  exp -= 53;
  Rational r(scaled);
  if (exp > 0) {
    r *= Rational(BigInt(1) << exp);
  } else if (exp < 0) {
    r /= Rational(BigInt(1) << -exp);
  }
  return r;
}

double ToDouble(const Rational& r) { return r.convert_to<double>(); }

std::string ToString(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

BigInt RoundTiesUp(const Rational& r) {
  // floor(r + 1/2)
  const Rational shifted = r + Rational(1, 2);
  BigInt num = boost::multiprecision::numerator(shifted);
  BigInt den = boost::multiprecision::denominator(shifted);
  BigInt q = num / den;  // truncates toward zero
  if (num < 0 && q * den != num) --q;
  return q;
}

Rational Abs(const Rational& r) { return r < 0 ? Rational(-r) : r; }

Rational Pow(const Rational& r, unsigned k) {
  Rational out(1);
  Rational base = r;
  while (k > 0) {
    if (k & 1u) out *= base;
    base *= base;
    k >>= 1u;
  }
  return out;
}

namespace {

int CompareValues(const Value& a, const Value& b) {
  if (a.KindIndex() != b.KindIndex()) {
    return a.KindIndex() < b.KindIndex() ? -1 : 1;
  }
  auto cmp3 = [](auto x, auto y) { return x < y ? -1 : (y < x ? 1 : 0); };
  if (a.IsUnit()) return 0;
  if (a.IsInt()) return cmp3(a.AsInt(), b.AsInt());
  if (a.IsFlag()) return cmp3(a.AsFlag(), b.AsFlag());
  if (a.IsRrFlag()) return cmp3(a.AsRrFlag(), b.AsRrFlag());
  if (a.IsRational()) return cmp3(a.AsRational(), b.AsRational());
  if (a.IsString()) return a.AsString().compare(b.AsString());
  if (a.IsList()) {
    const ValueList& xs = a.AsList();
    const ValueList& ys = b.AsList();
    for (size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
      int c = CompareValues(xs[i], ys[i]);
      if (c != 0) return c;
    }
    return cmp3(xs.size(), ys.size());
  }
  // Creation queries.
  const CreationQuery& x = *a.AsCreation();
  const CreationQuery& y = *b.AsCreation();
  if (x < y) return -1;
  if (y < x) return 1;
  return 0;
}

}  // namespace

bool Value::operator==(const Value& other) const {
  return CompareValues(*this, other) == 0;
}

bool Value::operator<(const Value& other) const {
  return CompareValues(*this, other) < 0;
}

std::string Value::ToString() const {
  if (IsUnit()) return "()";
  if (IsInt()) return std::to_string(AsInt());
  if (IsFlag()) return AsFlag() == Flag::kTop ? "top" : "bot";
  if (IsRrFlag()) return AsRrFlag() == RrFlag::kExposed ? "exp" : "prv";
  if (IsRational()) return dplab::ToString(AsRational());
  if (IsString()) return "\"" + AsString() + "\"";
  if (IsList()) {
    std::string out = "[";
    const ValueList& xs = AsList();
    for (size_t i = 0; i < xs.size(); ++i) {
      if (i > 0) out += ",";
      out += xs[i].ToString();
    }
    return out + "]";
  }
  return AsCreation()->ToString();
}

PrivacyParams PrivacyParams::FromDouble(double epsilon, double delta) {
  if (!(epsilon >= 0)) {
    throw std::invalid_argument("PrivacyParams: epsilon must be >= 0");
  }
  if (!(delta >= 0 && delta <= 1)) {
    throw std::invalid_argument("PrivacyParams: delta must be in [0,1]");
  }
  PrivacyParams p;
  p.epsilon = epsilon;
  p.delta = delta;
  p.rho = RationalFromDouble(std::exp(epsilon));
  if (p.rho < 1) p.rho = 1;  // guard exp() rounding just below 1 at eps ~ 0
  p.delta_exact = RationalFromDouble(delta);
  return p;
}

PrivacyParams PrivacyParams::FromExact(Rational rho, Rational delta) {
  if (rho < 1) {
    throw std::invalid_argument("PrivacyParams: rho must be >= 1");
  }
  if (delta < 0 || delta > 1) {
    throw std::invalid_argument("PrivacyParams: delta must be in [0,1]");
  }
  PrivacyParams p;
  p.epsilon = std::log(dplab::ToDouble(rho));
  p.delta = dplab::ToDouble(delta);
  p.rho = std::move(rho);
  p.delta_exact = std::move(delta);
  return p;
}

bool CreationQuery::operator==(const CreationQuery& o) const {
  return mech_id == o.mech_id && init_state == o.init_state &&
         params == o.params && vf_id == o.vf_id;
}

bool CreationQuery::operator<(const CreationQuery& o) const {
  if (mech_id != o.mech_id) return mech_id < o.mech_id;
  if (!(init_state == o.init_state)) return init_state < o.init_state;
  if (!(params == o.params)) return params < o.params;
  return vf_id < o.vf_id;
}

std::string CreationQuery::ToString() const {
  return "create(" + mech_id + "," + init_state.ToString() +
         ",rho=" + dplab::ToString(params.rho) +
         ",delta=" + dplab::ToString(params.delta_exact) + "," + vf_id + ")";
}

std::string Message::ToString() const {
  switch (kind) {
    case MessageKind::kCreationQuery:
      return "C:" + payload.ToString();
    case MessageKind::kQuery:
      return "Q:" + payload.ToString();
    case MessageKind::kQueryPair:
      return "QP:" + payload.ToString();
    case MessageKind::kAnswer:
      return "A:" + payload.ToString();
    case MessageKind::kAck:
      return "K:" + payload.ToString();
    case MessageKind::kHalt:
      return "HALT";
  }
  return "?";
}

Value Transcript::Key() const {
  ValueList encoded;
  encoded.reserve(messages.size());
  for (const auto& [dir, msg] : messages) {
    encoded.push_back(Value(ValueList{
        Value(static_cast<int64_t>(dir)),
        Value(static_cast<int64_t>(msg.kind)), msg.payload}));
  }
  return Value(std::move(encoded));
}

std::vector<Message> Transcript::Answers() const {
  std::vector<Message> out;
  for (const auto& [dir, msg] : messages) {
    if (dir == Direction::kToAdversary) out.push_back(msg);
  }
  return out;
}

std::string Transcript::ToString() const {
  std::string out;
  for (const auto& [dir, msg] : messages) {
    out += dir == Direction::kToMechanism ? ">" : "<";
    out += msg.ToString();
    out += " ";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

}  // namespace dplab
