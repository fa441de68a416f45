#include "conelab/rational.hpp"

#include <cctype>

#include "conelab/errors.hpp"

namespace conelab {

  namespace {
    bool parse_integer(std::string_view text, Integer& out) {
      if (text.empty()) {
        return false;
      }
      std::size_t i = (text[0] == '-' || text[0] == '+') ? 1 : 0;
      if (i == text.size()) {
        return false;
      }
      for (std::size_t j = i; j < text.size(); ++j) {
        if (!std::isdigit(static_cast<unsigned char>(text[j]))) {
          return false;
        }
      }
      std::string digits(text[0] == '+' ? text.substr(1) : text);
      return out.set_str(digits, 10) == 0;
    }
  }  // namespace

  Rational parse_rational(std::string_view text) {
    std::size_t begin = 0;
    while (begin < text.size()
           && std::isspace(static_cast<unsigned char>(text[begin]))) {
      ++begin;
    }
    std::size_t end = text.size();
    while (end > begin
           && std::isspace(static_cast<unsigned char>(text[end - 1]))) {
      --end;
    }
    std::string_view body = text.substr(begin, end - begin);
    auto             slash = body.find('/');
    Integer          num, den = 1;
    if (slash == std::string_view::npos) {
      if (!parse_integer(body, num)) {
        throw ParseError("expected a rational p or p/q", begin);
      }
    } else {
      if (!parse_integer(body.substr(0, slash), num)) {
        throw ParseError("expected an integer numerator", begin);
      }
      auto den_text = body.substr(slash + 1);
      if (den_text.empty() || den_text[0] == '-' || den_text[0] == '+'
          || !parse_integer(den_text, den)) {
        throw ParseError("expected a positive integer denominator",
                         begin + slash + 1);
      }
      if (den == 0) {
        throw ParseError("zero denominator", begin + slash + 1);
      }
    }
    Rational result(num, den);
    result.canonicalize();
    return result;
  }

  std::string to_pq(Rational const& value) {
    return value.get_num().get_str() + "/" + value.get_den().get_str();
  }

  Rational abs_value(Rational const& value) {
    return sgn(value) < 0 ? Rational(-value) : value;
  }

  Rational power(Rational const& base, std::int64_t exponent) {
    Rational result = 1;
    Rational factor = exponent >= 0 ? base : Rational(1 / base);
    auto     k      = exponent >= 0 ? static_cast<std::uint64_t>(exponent)
                                    : static_cast<std::uint64_t>(-exponent);
    while (k > 0) {
      if (k & 1U) {
        result *= factor;
      }
      factor *= factor;
      k >>= 1U;
    }
    return result;
  }

  std::vector<Rational> primitive_integer_scaling(std::vector<Rational> values) {
    Integer lcm_den = 1;
    for (auto const& v : values) {
      mpz_lcm(lcm_den.get_mpz_t(), lcm_den.get_mpz_t(),
              v.get_den().get_mpz_t());
    }
    Integer g = 0;
    for (auto const& v : values) {
      Integer scaled = v.get_num() * (lcm_den / v.get_den());
      mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), scaled.get_mpz_t());
    }
    if (g == 0) {
      return values;
    }
    for (auto& v : values) {
      v = Rational(v.get_num() * (lcm_den / v.get_den()) / g);
    }
    return values;
  }

}  // namespace conelab
