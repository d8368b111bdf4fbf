#pragma once

// Partial bijections over a weighted carrier: the inverse semigroup the whole
// lab is built on. Composition, inverse, trace, uniform distance, orthogonal
// and generalized sums, and deterministic enumeration of the full semigroup.
//
// Distance convention: |s - t| is the measure of the points, in the union of
// the two domains, where the maps disagree. A point where both maps are
// undefined is an agreement. This is the unique convention compatible with
// the trace identity |s - t| = tr(s⁻¹s) + tr(t⁻¹t) - tr(s⁻¹st⁻¹t) - tr(st⁻¹).

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "soficlab/carrier.hpp"
#include "soficlab/rational.hpp"

namespace soficlab {

class PartialBijection {
 public:
  static constexpr std::int32_t kUndefined = -1;

  // mapping[x] = image of x, or kUndefined. Validates injectivity and range.
  PartialBijection(CarrierPtr carrier, std::vector<std::int32_t> mapping);

  // The nowhere-defined map (the semigroup zero).
  static PartialBijection zero(const CarrierPtr& carrier);

  // The identity map (the semigroup unit).
  static PartialBijection identity(const CarrierPtr& carrier);

  // Builds from (point, image) pairs; throws ValidationError on repeats or
  // injectivity violations.
  static PartialBijection from_pairs(const CarrierPtr& carrier,
                                     const std::vector<std::pair<int, int>>& pairs);

  // Partial identity on the given point set.
  static PartialBijection projection_on(const CarrierPtr& carrier,
                                        const std::vector<int>& points);

  const CarrierPtr& carrier() const { return carrier_; }
  int size() const { return static_cast<int>(map_.size()); }
  bool defined(int x) const { return map_[static_cast<std::size_t>(x)] != kUndefined; }
  int image(int x) const { return map_[static_cast<std::size_t>(x)]; }
  const std::vector<std::int32_t>& mapping() const { return map_; }

  int domain_size() const { return domain_size_; }
  std::vector<int> domain_points() const;
  std::vector<int> range_points() const;

  bool is_zero() const { return domain_size_ == 0; }
  bool is_identity() const;
  // A projection is a partial identity: every defined point is fixed.
  bool is_projection() const;
  // True when this is a restriction of `other` (graph inclusion).
  bool restriction_of(const PartialBijection& other) const;
  // Keep only the points where `keep(x)` holds.
  PartialBijection restricted(const std::vector<int>& points) const;

  PartialBijection inverse() const;

  bool operator==(const PartialBijection& other) const;
  bool operator!=(const PartialBijection& other) const { return !(*this == other); }
  // Deterministic total order: lexicographic on the mapping vector, with
  // undefined sorting before any defined image.
  bool operator<(const PartialBijection& other) const;

  std::uint64_t hash() const;  // FNV-1a over the mapping, machine-independent
  std::string to_string() const;

 private:
  PartialBijection() = default;
  CarrierPtr carrier_;
  std::vector<std::int32_t> map_;
  int domain_size_ = 0;
  friend PartialBijection compose(const PartialBijection&, const PartialBijection&);
  friend class PartialBijectionBuilder;
};

// (s t)(x) = s(t(x)) on dom st = t⁻¹(ran t ∩ dom s).
PartialBijection compose(const PartialBijection& s, const PartialBijection& t);
inline PartialBijection operator*(const PartialBijection& s, const PartialBijection& t) {
  return compose(s, t);
}

// Number of fixed points (integer kernel behind trace on uniform carriers).
int fixed_point_count(const PartialBijection& s);

// Number of points in dom s ∪ dom t where the maps disagree.
int disagreement_count(const PartialBijection& s, const PartialBijection& t);

// tr(s) = measure of the fixed-point set. Exact rational in [0, 1].
Rational trace(const PartialBijection& s);

// |s - t| as above. Exact rational in [0, 1].
Rational distance(const PartialBijection& s, const PartialBijection& t);

// Measure of the domain. Equals tr(s⁻¹s).
Rational domain_measure(const PartialBijection& s);

// Union of pairwise-orthogonal parts (disjoint domains and disjoint ranges).
// Throws OverlapError identifying the first violating pair. Empty list gives
// the zero map, hence the explicit carrier argument.
PartialBijection orthogonal_sum(const CarrierPtr& carrier,
                                std::span<const PartialBijection> parts);

// Total extension of the sum: part i contributes exactly at the points x
// with x in dom s_i, x outside every other dom s_j, and s_i(x) outside every
// other ran s_j. Defined for every input list; extends orthogonal_sum.
PartialBijection generalized_sum(const CarrierPtr& carrier,
                                 std::span<const PartialBijection> parts);

// The projection π_i selecting the points where part i survives in the
// generalized sum: s_i restricted by it contributes exactly its sum share.
// Realized algebraically as
//   (s_i⁻¹s_i ∏_{j≠i}(1-s_j⁻¹s_j)) · s_i⁻¹ (s_is_i⁻¹ ∏_{j≠i}(1-s_js_j⁻¹)) s_i.
PartialBijection sum_projection(std::span<const PartialBijection> parts, std::size_t i);

// |⟦d⟧| = Σ_j C(d,j)² j!.
BigInt partial_bijection_count(int d);

// Every partial bijection of the carrier, in the documented deterministic
// order: domain bitmask ascending (as an unsigned integer over points), and
// for equal domains, image tuples lexicographically ascending. Requires
// carrier size ≤ 64 for the mask order; throws CapExceeded when the total
// count exceeds `cap`.
std::vector<PartialBijection> enumerate_all(const CarrierPtr& carrier,
                                            std::uint64_t cap = 10'000'000);

}  // namespace soficlab
