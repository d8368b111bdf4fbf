#pragma once

// Shared helpers for the unit suites: seeded random elements and independent
// reference implementations used as oracles. Everything here is written
// against the public API only, with deliberately naive algorithms, so the
// production code and the test expectations come from different routes.

#include <set>
#include <vector>

#include "soficlab/pperm.hpp"
#include "soficlab/rng.hpp"

namespace testsupport {

using soficlab::Carrier;
using soficlab::CarrierPtr;
using soficlab::PartialBijection;
using soficlab::Rational;
using soficlab::RngStream;

// Random partial bijection: each point is kept with probability 1/2 and the
// kept points receive distinct random images.
inline PartialBijection random_partial_bijection(const CarrierPtr& c, RngStream& rng) {
  const int d = c->size();
  std::vector<int> targets(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) targets[static_cast<std::size_t>(i)] = i;
  rng.shuffle(targets);
  std::vector<std::int32_t> map(static_cast<std::size_t>(d), PartialBijection::kUndefined);
  std::size_t next = 0;
  for (int x = 0; x < d; ++x)
    if (rng.next() & 1) map[static_cast<std::size_t>(x)] = targets[next++];
  return PartialBijection(c, std::move(map));
}

inline PartialBijection random_projection(const CarrierPtr& c, RngStream& rng) {
  std::vector<int> points;
  for (int x = 0; x < c->size(); ++x)
    if (rng.next() & 1) points.push_back(x);
  return PartialBijection::projection_on(c, points);
}

// Naive set-based reference for the generalized sum: part i contributes at x
// exactly when no other part defines x and no other part's range contains
// the image.
inline PartialBijection generalized_sum_oracle(const CarrierPtr& c,
                                               const std::vector<PartialBijection>& parts) {
  const int d = c->size();
  std::vector<std::set<int>> doms(parts.size()), rans(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i)
    for (int x = 0; x < d; ++x)
      if (parts[i].defined(x)) {
        doms[i].insert(x);
        rans[i].insert(parts[i].image(x));
      }
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (int x : doms[i]) {
      const int y = parts[i].image(x);
      bool keep = true;
      for (std::size_t j = 0; j < parts.size() && keep; ++j) {
        if (j == i) continue;
        if (doms[j].count(x) || rans[j].count(y)) keep = false;
      }
      if (keep) pairs.emplace_back(x, y);
    }
  }
  return PartialBijection::from_pairs(c, pairs);
}

}  // namespace testsupport
