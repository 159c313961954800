#ifndef DPLAB_RATIONAL_H_
#define DPLAB_RATIONAL_H_

#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace dplab {

// Exact arbitrary-precision rational. All probability bookkeeping in the
// library runs on this type; doubles appear only at construction and
// reporting boundaries. Every finite double converts exactly.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Exact value of a finite double (2^-k denominators). Throws on NaN/inf.
Rational RationalFromDouble(double x);

double ToDouble(const Rational& r);

// r as "p/q" in lowest terms (q omitted when 1). Stable across runs.
std::string ToString(const Rational& r);

// Round to the nearest integer, ties toward +infinity.
BigInt RoundTiesUp(const Rational& r);

// |r|.
Rational Abs(const Rational& r);

// r^k for k >= 0.
Rational Pow(const Rational& r, unsigned k);

}  // namespace dplab

#endif  // DPLAB_RATIONAL_H_
