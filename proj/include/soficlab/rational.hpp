#pragma once

// Exact arithmetic used everywhere in the library: rationals for measures,
// traces and distances, big integers for counts. Floating point appears only
// at the reporting boundary (growth ratios), never in core arithmetic.

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace soficlab {

using Rational = mpq_class;
using BigInt = mpz_class;

// Parses "num/den", "num", with optional sign. Throws ParseError on garbage
// or zero denominator. The result is canonicalized.
Rational parse_rational(const std::string& text);

// Canonical serialization: "num/den", or just "num" when den == 1.
std::string rational_to_string(const Rational& q);

std::string bigint_to_string(const BigInt& n);

// Exact floor of a rational, as long. Assumes the result fits.
long floor_long(const Rational& q);

// Exact ceiling of a rational, as long. Assumes the result fits.
long ceil_long(const Rational& q);

BigInt factorial(unsigned long n);

BigInt binomial(unsigned long n, unsigned long k);

// ln(count) / (d * ln d) in double precision; -infinity when count == 0.
// This is the reporting-boundary float: everything feeding it is exact.
double growth_ratio(const BigInt& count, int d);

// Natural log of a positive big integer, in double precision.
double log_bigint(const BigInt& n);

}  // namespace soficlab
