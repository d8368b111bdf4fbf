#pragma once

// A carrier is a finite probability space: points 0..size-1 with positive
// rational weights summing to 1. Carriers are immutable and shared; all
// partial bijections hold a pointer to theirs.

#include <memory>
#include <vector>

#include "soficlab/rational.hpp"

namespace soficlab {

class Carrier;
using CarrierPtr = std::shared_ptr<const Carrier>;

class Carrier {
 public:
  // Uniform weights 1/size.
  static CarrierPtr uniform(int size);

  // Explicit weights; validates positivity and total mass 1.
  static CarrierPtr weighted(std::vector<Rational> weights);

  int size() const { return static_cast<int>(weights_.size()); }
  const Rational& weight(int x) const { return weights_[static_cast<std::size_t>(x)]; }
  const std::vector<Rational>& weights() const { return weights_; }

  // True when all points weigh the same (enables integer fast paths:
  // any measure is disagreement-count / size).
  bool is_uniform() const { return uniform_; }

  // Measure of a k-point subset of a uniform carrier.
  Rational uniform_measure(long k) const;

  bool same_as(const Carrier& other) const;

 private:
  explicit Carrier(std::vector<Rational> weights);
  std::vector<Rational> weights_;
  bool uniform_;
};

// Throws CarrierMismatch unless both carriers are structurally equal.
void require_same_carrier(const CarrierPtr& a, const CarrierPtr& b, const char* op);

}  // namespace soficlab
