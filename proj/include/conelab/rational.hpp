#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace conelab {

  using Rational = mpq_class;
  using Integer  = mpz_class;

  // Accepts "p", "p/q", "-p/q" with optional surrounding whitespace.  The
  // result is in lowest terms.  Throws ParseError.
  Rational parse_rational(std::string_view text);

  // Always "p/q", including "/1" for integers, so that serialized files have
  // a single spelling per value.
  std::string to_pq(Rational const& value);

  Rational abs_value(Rational const& value);

  Rational power(Rational const& base, std::int64_t exponent);

  // Smallest positive rational multiple of `values` that is an integer vector
  // with gcd 1.  The zero vector is returned unchanged.
  std::vector<Rational> primitive_integer_scaling(std::vector<Rational> values);

}  // namespace conelab
