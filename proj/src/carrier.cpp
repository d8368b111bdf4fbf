#include "soficlab/carrier.hpp"

#include "soficlab/errors.hpp"

namespace soficlab {

Carrier::Carrier(std::vector<Rational> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ValidationError("carrier must have at least one point");
  Rational total = 0;
  uniform_ = true;
  for (std::size_t x = 0; x < weights_.size(); ++x) {
    weights_[x].canonicalize();
    if (sgn(weights_[x]) <= 0)
      throw ValidationError("carrier weight of point " + std::to_string(x) +
                            " must be positive");
    total += weights_[x];
    if (weights_[x] != weights_[0]) uniform_ = false;
  }
  if (total != 1)
    throw ValidationError("carrier weights must sum to 1, got " +
                          rational_to_string(total));
}

CarrierPtr Carrier::uniform(int size) {
  if (size <= 0) throw ValidationError("carrier size must be positive");
  std::vector<Rational> w(static_cast<std::size_t>(size), Rational(1, size));
  return CarrierPtr(new Carrier(std::move(w)));
}

CarrierPtr Carrier::weighted(std::vector<Rational> weights) {
  return CarrierPtr(new Carrier(std::move(weights)));
}

Rational Carrier::uniform_measure(long k) const {
  Rational r(k, size());
  r.canonicalize();
  return r;
}

bool Carrier::same_as(const Carrier& other) const {
  if (this == &other) return true;
  return weights_ == other.weights_;
}

void require_same_carrier(const CarrierPtr& a, const CarrierPtr& b, const char* op) {
  if (a == b) return;
  if (a && b && a->same_as(*b)) return;
  throw CarrierMismatch(std::string(op) + ": operands live on different carriers");
}

}  // namespace soficlab
