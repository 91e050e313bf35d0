#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>

namespace leakscope {

// Exact probabilities for the precise engine. Arbitrary precision: trace
// probabilities are products of many small branch fractions and their sums
// overflow any fixed-width denominator.
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline Rational rational(std::int64_t num, std::int64_t den) {
  return Rational(num, den);
}

}  // namespace leakscope
