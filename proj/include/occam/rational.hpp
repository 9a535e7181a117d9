#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

namespace occam {

using Rational = boost::rational<std::int64_t>;

/// Parses "3", "-0.15", "2/7". Throws std::invalid_argument on junk.
Rational parse_rational(std::string_view text);
/// Shortest exact decimal when the denominator has only 2/5 factors,
/// otherwise 17 significant digits.
std::string format_rational(const Rational& r);
double to_double(const Rational& r);
std::int64_t ceil_div(std::int64_t num, std::int64_t den);
std::int64_t floor_div(std::int64_t num, std::int64_t den);

}  // namespace occam
