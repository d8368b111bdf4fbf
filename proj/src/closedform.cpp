#include "soficlab/closedform.hpp"

#include <algorithm>

#include "soficlab/errors.hpp"

namespace soficlab {

Rational predicted_dimension(const FinRelation& G) {
  return Rational(1) - G.transversal_measure();
}

EmbeddingCensus count_embeddings(const FinRelation& G, int d) {
  if (d < 1) throw ValidationError("target size must be positive");
  EmbeddingCensus census;
  census.d = d;
  census.predicted_ratio_limit = predicted_dimension(G);
  BigInt centralizer = 1;
  for (const auto& cls : G.classes()) {
    Rational share = G.carrier()->weight(cls.front()) * d;
    share.canonicalize();
    if (share.get_den() != 1) return census;  // no embedding: both counts stay 0
    centralizer *= factorial(share.get_num().get_ui());
  }
  census.centralizer_order = centralizer;
  census.total_embeddings = factorial(static_cast<unsigned long>(d)) / centralizer;
  return census;
}

BigInt cost_upper_count(const GeneratorSet& F, const Rational& delta, int d) {
  if (d < 1) throw ValidationError("target size must be positive");
  if (sgn(delta) < 0) throw ValidationError("delta must be nonnegative");
  BigInt bound = 1;
  for (const auto& [name, s] : F.generators()) {
    (void)name;
    const Rational mu = domain_measure(s);
    long lo = ceil_long((mu - 9 * delta) * d);
    long hi = floor_long((mu + 9 * delta) * d);
    lo = std::max(lo, 0l);
    hi = std::min(hi, static_cast<long>(d));
    if (lo > hi) return BigInt(0);
    BigInt best = 0;
    for (long a = lo; a <= hi; ++a) {
      const BigInt b = binomial(static_cast<unsigned long>(d), static_cast<unsigned long>(a));
      const BigInt term = b * b * factorial(static_cast<unsigned long>(a));
      if (term > best) best = term;
    }
    bound *= best;
  }
  return bound;
}

BallBound ball_bound(int d, const Rational& eps, const Rational& kappa) {
  if (d < 1) throw ValidationError("target size must be positive");
  if (sgn(eps) < 0 || sgn(kappa) < 0)
    throw ValidationError("radius and exponent must be nonnegative");
  long jmax = floor_long(eps * d);
  jmax = std::min(jmax, static_cast<long>(d));
  BallBound out;
  for (long j = 0; j <= jmax; ++j) {
    const BigInt b = binomial(static_cast<unsigned long>(d), static_cast<unsigned long>(j));
    out.exact_sum += b * b * factorial(static_cast<unsigned long>(j));
  }
  // exact check of exact_sum <= d^(kappa*d): raise both sides to the
  // denominator of kappa.
  Rational k = kappa;
  k.canonicalize();
  const unsigned long q = k.get_den().get_ui();
  const unsigned long exponent = k.get_num().get_ui() * static_cast<unsigned long>(d);
  BigInt lhs, rhs;
  mpz_pow_ui(lhs.get_mpz_t(), out.exact_sum.get_mpz_t(), q);
  mpz_ui_pow_ui(rhs.get_mpz_t(), static_cast<unsigned long>(d), exponent);
  out.bound_holds = lhs <= rhs;
  return out;
}

}  // namespace soficlab
