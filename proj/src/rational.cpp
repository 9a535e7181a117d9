#include "occam/rational.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace occam {

Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto bad = [&] { return std::invalid_argument("not a number: '" + s + "'"); };
  if (s.empty()) throw bad();
  if (auto slash = s.find('/'); slash != std::string::npos) {
    try {
      std::size_t used = 0;
      auto num = std::stoll(s.substr(0, slash), &used);
      if (used != slash) throw bad();
      auto den_str = s.substr(slash + 1);
      auto den = std::stoll(den_str, &used);
      if (used != den_str.size() || den == 0) throw bad();
      return Rational(num, den);
    } catch (const std::logic_error&) {
      throw bad();
    }
  }
  std::size_t k = 0;
  bool neg = false;
  if (s[k] == '-' || s[k] == '+') neg = s[k++] == '-';
  std::int64_t num = 0, den = 1;
  bool digits = false, dot = false;
  for (; k < s.size(); ++k) {
    char c = s[k];
    if (c == '.' && !dot) {
      dot = true;
      continue;
    }
    if (c < '0' || c > '9') throw bad();
    digits = true;
    if (num > (INT64_MAX - 9) / 10 || (dot && den > INT64_MAX / 10)) throw bad();
    num = num * 10 + (c - '0');
    if (dot) den *= 10;
  }
  if (!digits) throw bad();
  return Rational(neg ? -num : num, den);
}

std::string format_rational(const Rational& r) {
  auto den = r.denominator();
  std::int64_t d = den;
  int twos = 0, fives = 0;
  while (d % 2 == 0) d /= 2, ++twos;
  while (d % 5 == 0) d /= 5, ++fives;
  if (d == 1) {
    int places = std::max(twos, fives);
    if (places == 0) return std::to_string(r.numerator());
    std::int64_t scale = 1;
    for (int k = 0; k < places; ++k) scale *= 10;
    std::int64_t scaled = r.numerator() * (scale / den);
    bool neg = scaled < 0;
    std::string digits = std::to_string(neg ? -scaled : scaled);
    while (static_cast<int>(digits.size()) <= places) digits.insert(digits.begin(), '0');
    digits.insert(digits.end() - places, '.');
    return (neg ? "-" : "") + digits;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", to_double(r));
  return buf;
}

double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

std::int64_t floor_div(std::int64_t num, std::int64_t den) {
  if (den < 0) num = -num, den = -den;
  std::int64_t q = num / den;
  if ((num % den != 0) && (num < 0)) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t num, std::int64_t den) { return -floor_div(-num, den); }

}  // namespace occam
