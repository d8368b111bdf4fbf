#pragma once

// Free-product machinery at finite scale: an exactly embedded finite inverse
// semigroup on a uniform target, the permutations commuting with it,
// residuals relative to its orbit relation, random-conjugation concentration
// experiments, assembly of alternating-word assignments from two microstates
// and a commuting permutation, and the splitting inequality that bounds the
// count for a union of generator sets by the per-side counts times
// |commutant|/d!.

#include <cstdint>
#include <vector>

#include "soficlab/microstates.hpp"
#include "soficlab/relation.hpp"

namespace soficlab {

// An exact unital trace-preserving copy of a finite inverse semigroup inside
// the partial bijections of d uniform points. Holds the full image, the
// orbit relation its action induces on the target points, and the orbits
// grouped by equivariant isomorphism type. Permutations commuting with the
// image are exactly those permuting same-type orbits along their stored
// point labelings, so the commutant has order prod over types of
// (#orbits of that type)!.
class EmbeddedSemigroup {
 public:
  // The two-element semigroup {empty map, identity}: every permutation
  // commutes, all d singleton orbits share one type, order = d!.
  static EmbeddedSemigroup trivial(int d);

  // The full pseudogroup of g_rel embedded by contiguous blocks: source
  // point x receives d*weight(x) consecutive target points, and an element
  // maps slot i of block x to slot i of block y whenever it maps x to y.
  // Throws DivisibilityError when some block share is not an integer.
  static EmbeddedSemigroup block(const FinRelation& g_rel, int d);

  int d() const { return carrier_->size(); }
  const CarrierPtr& target() const { return carrier_; }
  // Every element of the embedded semigroup (closed under product/inverse).
  const std::vector<PartialBijection>& image() const { return image_; }
  // Orbit relation on the target points; classes are the image's orbits.
  const FinRelation& orbit_relation() const { return orbits_; }
  const BigInt& centralizer_order() const { return order_; }
  // orbit_groups()[t] lists the orbits of type t; each orbit is an ordered
  // point list, and positions correspond across orbits of one type (the
  // canonical equivariant matching used when sampling).
  const std::vector<std::vector<std::vector<int>>>& orbit_groups() const { return groups_; }

 private:
  EmbeddedSemigroup() = default;
  CarrierPtr carrier_;
  std::vector<PartialBijection> image_;
  FinRelation orbits_ = FinRelation::identity_uniform(1);
  BigInt order_ = 1;
  std::vector<std::vector<std::vector<int>>> groups_;
};

// Deterministic i.i.d. uniform draws from the commutant of an embedded
// semigroup: sample index i uses the stream (seed, i), so results never
// depend on call order or worker layout. Every draw is checked to commute
// with the whole image before it is returned.
class CentralizerSampler {
 public:
  CentralizerSampler(EmbeddedSemigroup g, std::uint64_t seed);

  const BigInt& order() const { return g_.centralizer_order(); }
  const EmbeddedSemigroup& embedded() const { return g_; }
  // The permutation drawn for this sample index.
  PartialBijection sample(std::uint64_t index) const;
  // Samples for indices 0..count-1.
  std::vector<PartialBijection> sample_many(std::size_t count) const;

 private:
  EmbeddedSemigroup g_;
  std::uint64_t seed_;
};

// The largest restriction of phi that moves points within their E-classes,
// and its normalized size (the measure of its domain).
struct Residual {
  PartialBijection restriction;
  Rational size = 0;
};
Residual residual(const PartialBijection& phi, const FinRelation& E);

// Empirical concentration of random conjugation: for each sampled theta in
// the commutant, form w = phi_1 theta psi_1 theta^-1 ... phi_n theta psi_n
// theta^-1 and test |Res(w)| < C * max_i(|Res(phi_i)|, |Res(psi_i)|) + eps
// (strict, exact rationals) against the orbit relation of g.
struct ConcentrationReport {
  int d = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  Rational epsilon = 0;
  Rational threshold_constant = 0;  // the constant C
  Rational threshold = 0;           // C * max residual + eps
  long successes = 0;
  Rational fraction = 0;  // successes / samples
};
ConcentrationReport concentration_experiment(const std::vector<PartialBijection>& phis,
                                             const std::vector<PartialBijection>& psis,
                                             const EmbeddedSemigroup& g, const Rational& C,
                                             const Rational& epsilon, std::size_t samples,
                                             std::uint64_t seed, int workers = 1);

// One letter of an alternating word: which side's ball it comes from and the
// element index within that ball.
struct AltLetter {
  int side = 1;  // 1 or 2
  int index = 0;
};
// A word with the trace the assembled value is measured against (for
// alternating words of trivial-residual letters in a free product, 0).
struct AltWord {
  std::vector<AltLetter> letters;
  Rational target_trace = 0;
};
struct PhiThetaReport {
  std::vector<PartialBijection> values;  // one per word
  std::vector<Rational> trace_defects;   // |tr(value) - target_trace|
  Rational max_trace_defect = 0;
};

// Assemble values for alternating words from two microstates that agree
// exactly on a shared list of ball values and a permutation theta commuting
// with that shared image: side-1 letters contribute phi1's value, side-2
// letters contribute theta phi2(value) theta^-1. Throws ValidationError if a
// shared value is missing from either ball, the restrictions differ, or
// theta fails to commute with them.
PhiThetaReport phi_theta(const MicrostateAssignment& phi1, const SigmaBall& ball1,
                         const MicrostateAssignment& phi2, const SigmaBall& ball2,
                         const PartialBijection& theta,
                         const std::vector<PartialBijection>& shared_g,
                         const std::vector<AltWord>& words);

// The splitting inequality on a tiny instance: anchored counts for F1, F2,
// and their disjoint union (same anchor, same n, delta, d = target_g.d())
// must satisfy union <= left * right * |commutant| / d!. This holds for
// every instance by the conjugation-pairing argument; a violation signals an
// implementation bug, not a property of the input.
struct SplittingReport {
  int d = 0;
  BigInt union_count = 0;
  BigInt left_count = 0;
  BigInt right_count = 0;
  BigInt centralizer = 0;
  Rational lhs = 0;  // union_count
  Rational rhs = 0;  // left * right * centralizer / d!
  bool holds = false;
};
SplittingReport splitting_check(const FinRelation& R, const GeneratorSet& F1,
                                const GeneratorSet& F2,
                                const std::vector<PartialBijection>& anchor,
                                const EmbeddedSemigroup& target_g, int n,
                                const Rational& delta, const CountOptions& opts);

}  // namespace soficlab
