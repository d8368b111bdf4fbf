#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "doctest.h"
#include "embedding_oracle.hpp"
#include "soficlab/closedform.hpp"
#include "soficlab/errors.hpp"
#include "soficlab/freeprod.hpp"

using namespace soficlab;

namespace {

FinRelation two_point() { return FinRelation::full_uniform(2); }

FinRelation two_swaps() {
  return build_relation(
      {Rational(1, 4), Rational(1, 4), Rational(1, 4), Rational(1, 4)}, {{0, 1}, {2, 3}});
}

// The fixed-point-free involution (0 1)(2 3)... on an even number of points.
PartialBijection paired_involution(const CarrierPtr& c) {
  std::vector<std::pair<int, int>> pairs;
  for (int x = 0; x + 1 < c->size(); x += 2) {
    pairs.emplace_back(x, x + 1);
    pairs.emplace_back(x + 1, x);
  }
  return PartialBijection::from_pairs(c, pairs);
}

std::vector<PartialBijection> trivial_anchor(const CarrierPtr& c) {
  return {PartialBijection::from_pairs(c, {}), PartialBijection::identity(c)};
}

}  // namespace

TEST_CASE("trivial embedding has full symmetric commutant and uniform samples") {
  const EmbeddedSemigroup g = EmbeddedSemigroup::trivial(3);
  CHECK(g.d() == 3);
  CHECK(g.image().size() == 2);
  CHECK(g.centralizer_order() == BigInt(6));
  CHECK(g.orbit_relation().classes().size() == 3);

  const CentralizerSampler sampler(g, 1);
  const auto draws = sampler.sample_many(600);
  std::map<std::vector<std::int32_t>, int> freq;
  for (const auto& theta : draws) {
    CHECK(theta.domain_size() == 3);
    ++freq[theta.mapping()];
  }
  CHECK(freq.size() == 6);
  for (const auto& [key, count] : freq) {
    (void)key;
    CHECK(count >= 60);
    CHECK(count <= 140);
  }
  CHECK(sampler.sample(5) == sampler.sample(5));
  const std::vector<PartialBijection> head(draws.begin(), draws.begin() + 50);
  CHECK(sampler.sample_many(50) == head);

  const EmbeddedSemigroup one = EmbeddedSemigroup::trivial(1);
  CHECK(one.centralizer_order() == BigInt(1));
  CHECK(CentralizerSampler(one, 9).sample(0).is_identity());
}

TEST_CASE("block embedding matches exhaustive commutant enumeration") {
  struct Case {
    FinRelation rel;
    int d;
    long order;
  };
  const std::vector<Case> cases = {
      {two_point(), 4, 2},
      {two_point(), 6, 6},
      {FinRelation::identity_uniform(2), 4, 4},
      {FinRelation::full_uniform(3), 3, 1},
      {build_relation({Rational(1, 2), Rational(1, 4), Rational(1, 4)}, {{0}, {1, 2}}), 4, 2},
  };
  for (const auto& c : cases) {
    const EmbeddedSemigroup g = EmbeddedSemigroup::block(c.rel, c.d);
    CHECK(g.centralizer_order() == BigInt(c.order));
    CHECK(oracle::centralizer_brute(g.image(), c.d) == c.order);
    // The commutant order equals the one the embedding census predicts.
    CHECK(g.centralizer_order() == count_embeddings(c.rel, c.d).centralizer_order);
  }
  const EmbeddedSemigroup big = EmbeddedSemigroup::block(two_swaps(), 8);
  CHECK(big.centralizer_order() == BigInt(4));
  CHECK(oracle::centralizer_brute(big.image(), 8) == 4);

  const EmbeddedSemigroup triv = EmbeddedSemigroup::trivial(4);
  CHECK(oracle::centralizer_brute(triv.image(), 4) == 24);

  // Orbits of the embedded two-point swap: slot 0 points {0,2}, slot 1 {1,3}.
  const EmbeddedSemigroup sw = EmbeddedSemigroup::block(two_point(), 4);
  const std::vector<std::vector<int>> expected = {{0, 2}, {1, 3}};
  CHECK(sw.orbit_relation().classes() == expected);
  const PartialBijection id4 = PartialBijection::identity(sw.target());
  CHECK(std::count(sw.image().begin(), sw.image().end(), id4) == 1);

  CHECK_THROWS_AS(EmbeddedSemigroup::block(two_point(), 3), DivisibilityError);
  try {
    EmbeddedSemigroup::block(two_point(), 3);
    FAIL("expected a divisibility failure");
  } catch (const DivisibilityError& e) {
    CHECK(e.required_divisor == 2);
  }
}

TEST_CASE("sampled commutant elements commute and cover the whole commutant") {
  const EmbeddedSemigroup g = EmbeddedSemigroup::block(two_point(), 4);
  const CentralizerSampler sampler(g, 7);
  std::map<std::vector<std::int32_t>, int> freq;
  for (std::uint64_t i = 0; i < 400; ++i) {
    const PartialBijection theta = sampler.sample(i);
    for (const auto& t : g.image()) CHECK(compose(theta, t) == compose(t, theta));
    ++freq[theta.mapping()];
  }
  CHECK(freq.size() == 2);
  for (const auto& [key, count] : freq) {
    (void)key;
    CHECK(count >= 140);
    CHECK(count <= 260);
  }
  // The sample set is exactly the brute-force commutant.
  std::set<std::vector<std::int32_t>> sampled;
  for (const auto& [key, count] : freq) {
    (void)count;
    sampled.insert(key);
  }
  std::set<std::vector<std::int32_t>> brute;
  std::vector<int> perm = {0, 1, 2, 3};
  do {
    std::vector<std::int32_t> map(perm.begin(), perm.end());
    const PartialBijection sigma(g.target(), std::move(map));
    bool commutes = true;
    for (const auto& t : g.image())
      if (compose(sigma, t) != compose(t, sigma)) {
        commutes = false;
        break;
      }
    if (commutes) brute.insert(sigma.mapping());
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(sampled == brute);
}

TEST_CASE("residual keeps exactly the within-class motion") {
  const CarrierPtr c4 = Carrier::uniform(4);
  const FinRelation eq = FinRelation::identity_uniform(4);
  const FinRelation full = FinRelation::full_uniform(4);
  const FinRelation halves = two_swaps();

  RngStream rng(11, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const PartialBijection phi = random_semigroup_element(c4, rng);
    const Residual fixed = residual(phi, eq);
    CHECK(fixed.size == trace(phi));
    for (int x = 0; x < 4; ++x)
      CHECK(fixed.restriction.image(x) == (phi.image(x) == x ? x : PartialBijection::kUndefined));

    const Residual whole = residual(phi, full);
    CHECK(whole.restriction == phi);
    CHECK(whole.size == domain_measure(phi));

    const Residual part = residual(phi, halves);
    CHECK(residual(part.restriction, halves).restriction == part.restriction);
    CHECK(part.size <= domain_measure(phi));
  }

  const PartialBijection mixed = PartialBijection::from_pairs(c4, {{0, 1}, {1, 2}, {3, 3}});
  const Residual r = residual(mixed, halves);
  CHECK(r.restriction == PartialBijection::from_pairs(c4, {{0, 1}, {3, 3}}));
  CHECK(r.size == Rational(1, 2));

  const PartialBijection one = PartialBijection::identity(c4);
  CHECK(residual(one, eq).size == Rational(1));
  CHECK(residual(one, halves).restriction == one);

  CHECK_THROWS_AS(residual(PartialBijection::identity(Carrier::uniform(3)), halves),
                  CarrierMismatch);
}

TEST_CASE("random conjugation concentrates the residual of alternating words") {
  const CarrierPtr c = Carrier::uniform(200);
  const PartialBijection invol = paired_involution(c);
  const EmbeddedSemigroup g = EmbeddedSemigroup::trivial(200);

  const ConcentrationReport rep =
      concentration_experiment({invol}, {invol}, g, Rational(1), Rational(1, 10), 1000, 1);
  CHECK(rep.d == 200);
  CHECK(rep.samples == 1000);
  CHECK(rep.threshold == Rational(1, 10));  // both parts have residual zero
  CHECK(rep.fraction >= Rational(9, 10));

  // Identical reruns and worker splits reproduce the count bit for bit.
  const ConcentrationReport again =
      concentration_experiment({invol}, {invol}, g, Rational(1), Rational(1, 10), 1000, 1);
  CHECK(again.successes == rep.successes);
  const ConcentrationReport split =
      concentration_experiment({invol}, {invol}, g, Rational(1), Rational(1, 10), 1000, 1, 3);
  CHECK(split.successes == rep.successes);

  // Identity parts: the word is the identity, residual 1, and the threshold
  // 1*1 + eps admits it.
  const PartialBijection one = PartialBijection::identity(c);
  const ConcentrationReport ident =
      concentration_experiment({one}, {one}, g, Rational(1), Rational(1, 10), 50, 1);
  CHECK(ident.fraction == Rational(1));
  CHECK(ident.threshold == Rational(11, 10));

  // Fractions along growing d stay nondecreasing within sampling noise.
  std::vector<Rational> fractions;
  for (int d : {50, 100, 200}) {
    const CarrierPtr cd = Carrier::uniform(d);
    const ConcentrationReport r = concentration_experiment(
        {paired_involution(cd)}, {paired_involution(cd)}, EmbeddedSemigroup::trivial(d),
        Rational(1), Rational(1, 10), 1000, 1);
    fractions.push_back(r.fraction);
  }
  CHECK(fractions[1] >= fractions[0] - Rational(3, 100));
  CHECK(fractions[2] >= fractions[1] - Rational(3, 100));

  CHECK_THROWS_AS(concentration_experiment({}, {}, g, Rational(1), Rational(1, 10), 10, 1),
                  ValidationError);
  CHECK_THROWS_AS(
      concentration_experiment({invol}, {invol, invol}, g, Rational(1), Rational(1, 10), 10, 1),
      ValidationError);
  CHECK_THROWS_AS(concentration_experiment({invol}, {invol}, g, Rational(1), Rational(1, 10), 0, 1),
                  ValidationError);
  CHECK_THROWS_AS(
      concentration_experiment({PartialBijection::identity(Carrier::uniform(4))},
                               {PartialBijection::identity(Carrier::uniform(4))}, g, Rational(1),
                               Rational(1, 10), 10, 1),
      CarrierMismatch);
}

TEST_CASE("phi_theta assembles alternating words from two microstates") {
  const FinRelation R = two_point();
  const PartialBijection swap_map =
      PartialBijection::from_pairs(R.carrier(), {{0, 1}, {1, 0}});
  const GeneratorSet F1(R, {{"a", swap_map}});
  const GeneratorSet F2(R, {{"b", swap_map}});
  const SigmaBall ball1 = sigma_ball(F1, 2);
  const SigmaBall ball2 = sigma_ball(F2, 2);

  const CarrierPtr target = Carrier::uniform(6);
  const PartialBijection sigma = paired_involution(target);
  const PartialBijection rho = PartialBijection::from_pairs(
      target, {{0, 2}, {2, 0}, {1, 3}, {3, 1}, {4, 5}, {5, 4}});
  const MicrostateAssignment phi1 = canonical_extend({{"a", sigma}}, ball1, target);
  const MicrostateAssignment phi2 = canonical_extend({{"b", rho}}, ball2, target);
  const std::vector<PartialBijection> shared = trivial_anchor(R.carrier());

  const int ia = *ball1.index_of(swap_map);
  const int ib = *ball2.index_of(swap_map);
  const PartialBijection one6 = PartialBijection::identity(target);

  // theta = identity: the assembly is the plain concatenation of values.
  {
    const AltWord w{{{1, ia}, {2, ib}}, Rational(0)};
    const PhiThetaReport rep = phi_theta(phi1, ball1, phi2, ball2, one6, shared, {w});
    CHECK(rep.values.size() == 1);
    CHECK(rep.values[0] == compose(sigma, rho));
    CHECK(rep.trace_defects[0] == trace(compose(sigma, rho)));
  }
  // Single letters evaluate to the side's own value, conjugated on side 2.
  {
    const PartialBijection theta = PartialBijection::from_pairs(
        target, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}});
    const PhiThetaReport rep = phi_theta(phi1, ball1, phi2, ball2, theta, shared,
                                         {AltWord{{{1, ia}}, Rational(0)},
                                          AltWord{{{2, ib}}, Rational(0)},
                                          AltWord{{}, Rational(1)}});
    CHECK(rep.values[0] == sigma);
    CHECK(rep.values[1] == compose(compose(theta, rho), theta.inverse()));
    CHECK(rep.values[2] == one6);
    CHECK(rep.trace_defects[2] == Rational(0));
  }
  // A word whose value is forced to the identity has zero defect against 1.
  {
    const AltWord w{{{1, ia}, {1, ia}}, Rational(1)};
    const PhiThetaReport rep = phi_theta(phi1, ball1, phi2, ball2, one6, shared, {w});
    CHECK(rep.values[0] == one6);
    CHECK(rep.max_trace_defect == Rational(0));
  }

  // Validation: unknown shared element, mismatched restrictions, a theta
  // that moves the shared image, a partial theta, and bad letters.
  const PartialBijection stray = PartialBijection::from_pairs(R.carrier(), {{0, 0}});
  CHECK_THROWS_AS(phi_theta(phi1, ball1, phi2, ball2, one6, {stray}, {}), ValidationError);
  CHECK_THROWS_AS(phi_theta(phi1, ball1, phi2, ball2, one6, {swap_map}, {}), ValidationError);
  {
    // Shared image = sigma itself; a theta that fails to commute with it.
    const PartialBijection bad_theta = PartialBijection::from_pairs(
        target, {{0, 0}, {1, 2}, {2, 1}, {3, 3}, {4, 4}, {5, 5}});
    const MicrostateAssignment phi2_same = canonical_extend({{"b", sigma}}, ball2, target);
    CHECK_THROWS_AS(phi_theta(phi1, ball1, phi2_same, ball2, bad_theta, {swap_map}, {}),
                    ValidationError);
    // And one that does commute works.
    const PartialBijection good_theta = PartialBijection::from_pairs(
        target, {{0, 2}, {1, 3}, {2, 0}, {3, 1}, {4, 4}, {5, 5}});
    const PhiThetaReport ok = phi_theta(phi1, ball1, phi2_same, ball2, good_theta, {swap_map},
                                        {AltWord{{{2, ib}}, Rational(0)}});
    CHECK(ok.values[0] == sigma);
  }
  const PartialBijection partial = PartialBijection::from_pairs(target, {{0, 1}, {1, 0}});
  CHECK_THROWS_AS(phi_theta(phi1, ball1, phi2, ball2, partial, shared, {}), ValidationError);
  CHECK_THROWS_AS(phi_theta(phi1, ball1, phi2, ball2, one6, shared,
                            {AltWord{{{3, 0}}, Rational(0)}}),
                  ValidationError);
  CHECK_THROWS_AS(phi_theta(phi1, ball1, phi2, ball2, one6, shared,
                            {AltWord{{{1, 999}}, Rational(0)}}),
                  ValidationError);

  // Statistical check: for random commuting theta, the alternating word of
  // two fixed-point-free involutions has small trace defect almost always.
  {
    const CarrierPtr big = Carrier::uniform(200);
    const SigmaBall b1 = sigma_ball(F1, 2);
    const SigmaBall b2 = sigma_ball(F2, 2);
    const PartialBijection inv200 = paired_involution(big);
    const MicrostateAssignment m1 = canonical_extend({{"a", inv200}}, b1, big);
    const MicrostateAssignment m2 = canonical_extend({{"b", inv200}}, b2, big);
    const CentralizerSampler sampler(EmbeddedSemigroup::trivial(200), 3);
    const int ja = *b1.index_of(swap_map);
    const int jb = *b2.index_of(swap_map);
    int good = 0;
    for (std::uint64_t i = 0; i < 500; ++i) {
      const PhiThetaReport rep =
          phi_theta(m1, b1, m2, b2, sampler.sample(i), trivial_anchor(R.carrier()),
                    {AltWord{{{1, ja}, {2, jb}}, Rational(0)}});
      if (rep.max_trace_defect < Rational(1, 10)) ++good;
    }
    CHECK(good >= 450);
  }
}

TEST_CASE("splitting inequality certified on tiny instances") {
  CountOptions opts;

  // Disjoint swaps, trivial shared semigroup. At d=2 no assignment matches
  // the quarter-weight traces exactly, so every count is zero.
  {
    const FinRelation R = two_swaps();
    const GeneratorSet F1(R, {{"s", PartialBijection::from_pairs(R.carrier(), {{1, 0}})}});
    const GeneratorSet F2(R, {{"t", PartialBijection::from_pairs(R.carrier(), {{3, 2}})}});
    const auto anchor = trivial_anchor(R.carrier());

    const SplittingReport zero = splitting_check(R, F1, F2, anchor,
                                                 EmbeddedSemigroup::trivial(2), 2, Rational(0),
                                                 opts);
    CHECK(zero.union_count == BigInt(0));
    CHECK(zero.holds);
    CHECK(zero.lhs == Rational(0));

    // A loose threshold makes all three counts positive. (At d=2 the ball
    // element ss' v s's carries trace 1/2, while every candidate's value
    // there has trace 0 or 1, so no threshold below 1/2 admits anything.)
    const SplittingReport loose = splitting_check(R, F1, F2, anchor,
                                                  EmbeddedSemigroup::trivial(2), 2,
                                                  Rational(2, 3), opts);
    // Per side, five values pass at 2/3: the empty map, both one-point
    // identities, and both one-point moves (each peaks at defect 1/2).
    CHECK(loose.left_count == BigInt(5));
    CHECK(loose.right_count == BigInt(5));
    CHECK(loose.union_count == BigInt(4));
    CHECK(loose.rhs == Rational(25));
    CHECK(loose.holds);

    const SplittingReport big = splitting_check(R, F1, F2, anchor,
                                                EmbeddedSemigroup::trivial(4), 2, Rational(0),
                                                opts);
    CHECK(big.left_count == BigInt(12));
    CHECK(big.right_count == BigInt(12));
    CHECK(big.union_count == BigInt(24));
    CHECK(big.centralizer == BigInt(24));
    CHECK(big.rhs == Rational(144));
    CHECK(big.holds);
  }

  // Swap against the identity on the two-point relation: equality case.
  {
    const FinRelation R = two_point();
    const GeneratorSet F1(R, {{"s", PartialBijection::from_pairs(R.carrier(), {{1, 0}})}});
    const GeneratorSet F2(R, {{"e", PartialBijection::identity(R.carrier())}});
    const SplittingReport rep = splitting_check(R, F1, F2, trivial_anchor(R.carrier()),
                                                EmbeddedSemigroup::trivial(4), 2, Rational(0),
                                                opts);
    CHECK(rep.left_count == BigInt(12));
    CHECK(rep.right_count == BigInt(1));
    CHECK(rep.union_count == BigInt(12));
    CHECK(rep.lhs == rep.rhs);
    CHECK(rep.holds);
  }

  // Two identity generators: every count is one and the bound is met with
  // equality.
  {
    const FinRelation R = FinRelation::identity_uniform(2);
    const GeneratorSet F1(R, {{"e1", PartialBijection::identity(R.carrier())}});
    const GeneratorSet F2(R, {{"e2", PartialBijection::identity(R.carrier())}});
    const SplittingReport rep = splitting_check(R, F1, F2, trivial_anchor(R.carrier()),
                                                EmbeddedSemigroup::trivial(3), 2, Rational(1, 10),
                                                opts);
    CHECK(rep.union_count == BigInt(1));
    CHECK(rep.left_count == BigInt(1));
    CHECK(rep.right_count == BigInt(1));
    CHECK(rep.rhs == Rational(1));
    CHECK(rep.holds);
  }

  // A nontrivial shared semigroup: the idempotent pseudogroup on two points.
  // Its commutant is trivial, which tightens the bound to an equality.
  {
    const FinRelation R = two_point();
    const CarrierPtr c = R.carrier();
    const PartialBijection p0 = PartialBijection::from_pairs(c, {{0, 0}});
    const PartialBijection p1 = PartialBijection::from_pairs(c, {{1, 1}});
    const std::vector<PartialBijection> anchor = {
        PartialBijection::from_pairs(c, {}), p0, p1, PartialBijection::identity(c)};
    const GeneratorSet F1(
        R, {{"s", PartialBijection::from_pairs(c, {{1, 0}})}, {"p0", p0}, {"p1", p1}});
    const GeneratorSet F2(R, {{"q0", p0}, {"q1", p1}});
    const EmbeddedSemigroup target_g = EmbeddedSemigroup::block(FinRelation::identity_uniform(2), 2);
    CHECK(target_g.centralizer_order() == BigInt(1));

    const SplittingReport rep =
        splitting_check(R, F1, F2, anchor, target_g, 2, Rational(0), opts);
    CHECK(rep.left_count == BigInt(2));
    CHECK(rep.right_count == BigInt(2));
    CHECK(rep.union_count == BigInt(2));
    CHECK(rep.rhs == Rational(2));
    CHECK(rep.lhs == rep.rhs);
    CHECK(rep.holds);
  }

  // Validation: colliding names and mismatched carriers.
  {
    const FinRelation R = two_point();
    const GeneratorSet F1(R, {{"s", PartialBijection::from_pairs(R.carrier(), {{1, 0}})}});
    const GeneratorSet F1b(R, {{"s", PartialBijection::from_pairs(R.carrier(), {{0, 1}})}});
    CHECK_THROWS_AS(splitting_check(R, F1, F1b, trivial_anchor(R.carrier()),
                                    EmbeddedSemigroup::trivial(2), 2, Rational(0), opts),
                    ValidationError);
    const FinRelation R4 = two_swaps();
    const GeneratorSet F2(R4, {{"t", PartialBijection::from_pairs(R4.carrier(), {{3, 2}})}});
    CHECK_THROWS_AS(splitting_check(R4, F1, F2, trivial_anchor(R4.carrier()),
                                    EmbeddedSemigroup::trivial(2), 2, Rational(0), opts),
                    CarrierMismatch);
  }
}
