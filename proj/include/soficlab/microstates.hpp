#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "soficlab/relation.hpp"
#include "soficlab/rng.hpp"

namespace soficlab {

// A value for every ball element, living on a uniform target carrier.
// Always unital: the identity element maps to the identity.
struct MicrostateAssignment {
  CarrierPtr target;
  std::vector<PartialBijection> values;  // indexed like SigmaBall::elements()
};

// Exact defect maxima of an assignment against its source ball.
struct DefectReport {
  Rational mult_defect = 0;   // max |φ(st) − φ(s)φ(t)| over in-ball pairs
  Rational trace_defect = 0;  // max |tr φ(s) − τ(s)| over the ball
  // Witnesses: ball element indices (left, right, product) and worst element.
  std::optional<std::tuple<int, int, int>> worst_pair;
  std::optional<int> worst_trace_element;

  bool passes(const Rational& delta) const;
};

// The uniform acceptance rule: a defect passes a threshold when it is
// strictly below it, or is exactly zero (so threshold 0 admits only exact
// assignments).
bool passes_threshold(const Rational& defect, const Rational& delta);

// All ordered pairs (left, right, product) of ball element indices whose
// composed value lands back in the ball.
std::vector<std::tuple<int, int, int>> product_table(const SigmaBall& ball);

// Extend a generator assignment over the whole ball along stored provenance:
// the identity letter maps to the identity, inverse letters to inverses of
// assigned values, words to products, elements to generalized sums of their
// word values.
MicrostateAssignment canonical_extend(const std::map<std::string, PartialBijection>& psi,
                                      const SigmaBall& ball, const CarrierPtr& target);

DefectReport defects(const MicrostateAssignment& phi, const SigmaBall& ball);

enum class CountMode { canonical, exact, anchored };
std::string to_string(CountMode mode);

// One restriction: the assignment's values at the generators' ball elements,
// in generator-name order. (Generators sharing one ball element restrict
// identically, so the count collapses such tuples.)
using Restriction = std::vector<PartialBijection>;

struct CoveringResult {
  long count = 0;
  bool exact = true;
};

struct CountReport {
  int d = 0;
  CountMode mode = CountMode::canonical;
  int n = 0;
  Rational delta = 0;
  BigInt count = 0;                    // distinct passing restrictions
  std::uint64_t restriction_hash = 0;  // order-independent hash of that set
  double ratio = 0;                    // ln(count) / (d ln d)
  // Covering numbers by radius, filled on demand from the restrictions.
  std::vector<std::pair<Rational, CoveringResult>> covering;
  // Exhaustive runs only:
  std::vector<Restriction> restrictions;  // filled when requested
  // Sampling runs only:
  bool sampled = false;
  BigInt space_size = 0;
  long samples = 0;
  long hits = 0;
  double estimate = 0;  // hits/samples * |space|
  double ci_low = 0;    // 95% Wilson interval on the passing fraction,
  double ci_high = 0;   // scaled by |space|
};

struct CountOptions {
  Rational delta = 0;
  BigInt psi_space_cap = BigInt(10000000);
  std::size_t ball_cap = 1000000;
  std::size_t exact_cap = 10000;  // ball size x target semigroup size
  long sample_budget = 0;         // > 0 enables sampling when over the cap
  int workers = 1;
  std::uint64_t seed = 1;
  bool collect_restrictions = false;
};

// Exhaustive (or sampled) scan over all generator assignments, counting those
// whose canonical extension passes the defect thresholds. The scan order is
// the enumerate_all order per generator, later generators varying fastest;
// results are independent of the worker count.
CountReport count_canonical(const GeneratorSet& F, int n, int d,
                            const CountOptions& opts);

// Existential counting on tiny instances: a restriction counts when at least
// one assignment of all ball elements extending it passes. Optionally
// collects every passing full assignment.
struct ExactCount {
  CountReport report;
  std::vector<MicrostateAssignment> assignments;
};
ExactCount count_exact(const GeneratorSet& F, int n, int d, const CountOptions& opts,
                       bool collect_assignments = false);

// Canonical counting restricted to assignments whose extension is an exact
// trace-preserving injective homomorphism on the given subsemigroup of ball
// values. Throws DivisibilityError when no target of size d can host the
// subsemigroup's projection traces.
CountReport count_anchored(const GeneratorSet& F, int n, int d,
                           const std::vector<PartialBijection>& anchor,
                           const CountOptions& opts);

// Minimal number of balls of the given radius, centered at restrictions,
// covering the whole restriction set. Coverage uses the open condition
// (distance < radius, with distance 0 always covered). Exact via search for
// up to 20 restrictions, greedy upper bound (exact = false) beyond.
CoveringResult covering_number(const std::vector<Restriction>& restrictions,
                               const Rational& radius);
// max over coordinates of the value distance.
Rational restriction_distance(const Restriction& a, const Restriction& b);
// Compute covering numbers for each radius and store them on the report.
void fill_covering(CountReport& report, const std::vector<Rational>& radii);

// Growth ratios ln(count)/(d ln d) for a list of (d, count) rows, with a
// qualitative trend summary; counts of zero report -infinity.
struct GrowthRow {
  int d;
  BigInt count;
  double ratio;
};
struct GrowthReport {
  std::vector<GrowthRow> rows;
  std::string trend;  // "constant" | "nondecreasing" | "nonincreasing" | "mixed"
};
GrowthReport growth_report(const std::vector<std::pair<int, BigInt>>& counts);

// Uniformly random element of the full partial-bijection semigroup on d
// points (used by the sampling path; exact uniformity via the size-stratified
// counts).
PartialBijection random_semigroup_element(const CarrierPtr& carrier, RngStream& rng);

}  // namespace soficlab
