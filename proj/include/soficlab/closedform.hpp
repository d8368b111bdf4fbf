#pragma once

// Closed-form predictions that the counting experiments are checked against:
// embedding censuses, the predicted growth-ratio limit, the cost-based upper
// bound on restriction counts, and the ball-cardinality bound.

#include "soficlab/relation.hpp"

namespace soficlab {

struct EmbeddingCensus {
  int d = 0;
  BigInt total_embeddings = 0;
  BigInt centralizer_order = 0;
  Rational predicted_ratio_limit = 0;  // 1 - transversal measure
};

// Census of the unital trace-preserving embeddings of G's full pseudogroup
// into the partial bijections of d uniform points. Embeddings exist iff every
// class c receives an integral block size m_c = d * (point weight of c); then
//   total_embeddings  = d! / prod_c m_c!
//   centralizer_order = prod_c m_c!   (one factor per class, so two classes
//                                      of equal size contribute separately)
// and total * centralizer = d!. When divisibility fails both values are 0.
EmbeddingCensus count_embeddings(const FinRelation& G, int d);

// 1 - mu(transversal measure of G): the predicted value of the growth ratio.
Rational predicted_dimension(const FinRelation& G);

// prod over generators s of max_a C(d,a)^2 a!, the maximum over integers a
// within 9*delta*d of cost(s)*d, clamped to [0, d]. A certified upper bound
// for the distinct-restriction count at ball radius 4; an empty range for
// some generator makes the whole bound 0.
BigInt cost_upper_count(const GeneratorSet& F, const Rational& delta, int d);

// Upper bound on the cardinality of any open eps-ball in the semigroup of
// partial bijections of d points:
//   exact_sum = sum_{j <= floor(eps*d)} C(d,j)^2 j!
// (any member of the ball differs from the center on fewer than eps*d
// points). bound_holds reports exact_sum <= d^(kappa*d), compared exactly in
// big integers for rational kappa.
struct BallBound {
  BigInt exact_sum = 0;
  bool bound_holds = false;
};
BallBound ball_bound(int d, const Rational& eps, const Rational& kappa);

}  // namespace soficlab
