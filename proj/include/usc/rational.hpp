#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <string_view>

namespace usc {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;

// Accepts "p/q" or "p"; throws SpecError.
Rational parse_rational(std::string_view text);

// Always "p/q", with q > 0.
std::string to_string(const Rational& r);

double to_double(const Rational& r);

}  // namespace usc
