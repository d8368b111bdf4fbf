#include "soficlab/rational.hpp"

#include <cmath>
#include <limits>

#include "soficlab/errors.hpp"

namespace soficlab {

Rational parse_rational(const std::string& text) {
  if (text.empty()) throw ParseError("empty rational literal");
  mpq_class q;
  if (q.set_str(text, 10) != 0)
    throw ParseError("bad rational literal: '" + text + "'");
  if (sgn(q.get_den()) == 0)
    throw ParseError("zero denominator in rational literal: '" + text + "'");
  q.canonicalize();
  return q;
}

std::string rational_to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

std::string bigint_to_string(const BigInt& n) { return n.get_str(); }

long floor_long(const Rational& q) {
  BigInt f;
  mpz_fdiv_q(f.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
  return f.get_si();
}

long ceil_long(const Rational& q) {
  BigInt c;
  mpz_cdiv_q(c.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
  return c.get_si();
}

BigInt factorial(unsigned long n) {
  BigInt r;
  mpz_fac_ui(r.get_mpz_t(), n);
  return r;
}

BigInt binomial(unsigned long n, unsigned long k) {
  if (k > n) return 0;
  BigInt r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

double log_bigint(const BigInt& n) {
  signed long exp = 0;
  double mant = mpz_get_d_2exp(&exp, n.get_mpz_t());
  return std::log(mant) + static_cast<double>(exp) * std::log(2.0);
}

double growth_ratio(const BigInt& count, int d) {
  if (sgn(count) <= 0) return -std::numeric_limits<double>::infinity();
  if (d <= 1) return 0.0;
  return log_bigint(count) / (static_cast<double>(d) * std::log(static_cast<double>(d)));
}

}  // namespace soficlab
