#include "soficlab/pperm.hpp"

#include <algorithm>

#include "soficlab/errors.hpp"

namespace soficlab {

namespace {

void validate_mapping(const CarrierPtr& carrier, const std::vector<std::int32_t>& map) {
  const int d = carrier->size();
  if (static_cast<int>(map.size()) != d)
    throw ValidationError("mapping length " + std::to_string(map.size()) +
                          " does not match carrier size " + std::to_string(d));
  std::vector<char> used(static_cast<std::size_t>(d), 0);
  for (int x = 0; x < d; ++x) {
    const std::int32_t y = map[static_cast<std::size_t>(x)];
    if (y == PartialBijection::kUndefined) continue;
    if (y < 0 || y >= d)
      throw ValidationError("image of point " + std::to_string(x) + " is out of range");
    if (used[static_cast<std::size_t>(y)])
      throw ValidationError("mapping is not injective: image " + std::to_string(y) +
                            " is hit twice");
    used[static_cast<std::size_t>(y)] = 1;
  }
}

}  // namespace

PartialBijection::PartialBijection(CarrierPtr carrier, std::vector<std::int32_t> mapping)
    : carrier_(std::move(carrier)), map_(std::move(mapping)) {
  validate_mapping(carrier_, map_);
  domain_size_ = 0;
  for (std::int32_t y : map_)
    if (y != kUndefined) ++domain_size_;
}

PartialBijection PartialBijection::zero(const CarrierPtr& carrier) {
  PartialBijection r;
  r.carrier_ = carrier;
  r.map_.assign(static_cast<std::size_t>(carrier->size()), kUndefined);
  r.domain_size_ = 0;
  return r;
}

PartialBijection PartialBijection::identity(const CarrierPtr& carrier) {
  PartialBijection r;
  r.carrier_ = carrier;
  const int d = carrier->size();
  r.map_.resize(static_cast<std::size_t>(d));
  for (int x = 0; x < d; ++x) r.map_[static_cast<std::size_t>(x)] = x;
  r.domain_size_ = d;
  return r;
}

PartialBijection PartialBijection::from_pairs(
    const CarrierPtr& carrier, const std::vector<std::pair<int, int>>& pairs) {
  std::vector<std::int32_t> map(static_cast<std::size_t>(carrier->size()), kUndefined);
  for (const auto& [x, y] : pairs) {
    if (x < 0 || x >= carrier->size() || y < 0 || y >= carrier->size())
      throw ValidationError("pair (" + std::to_string(x) + ", " + std::to_string(y) +
                            ") is out of range");
    if (map[static_cast<std::size_t>(x)] != kUndefined)
      throw ValidationError("point " + std::to_string(x) + " mapped twice");
    map[static_cast<std::size_t>(x)] = y;
  }
  return PartialBijection(carrier, std::move(map));
}

PartialBijection PartialBijection::projection_on(const CarrierPtr& carrier,
                                                 const std::vector<int>& points) {
  std::vector<std::int32_t> map(static_cast<std::size_t>(carrier->size()), kUndefined);
  for (int x : points) {
    if (x < 0 || x >= carrier->size())
      throw ValidationError("projection point " + std::to_string(x) + " out of range");
    map[static_cast<std::size_t>(x)] = x;
  }
  return PartialBijection(carrier, std::move(map));
}

std::vector<int> PartialBijection::domain_points() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(domain_size_));
  for (int x = 0; x < size(); ++x)
    if (defined(x)) out.push_back(x);
  return out;
}

std::vector<int> PartialBijection::range_points() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(domain_size_));
  for (int x = 0; x < size(); ++x)
    if (defined(x)) out.push_back(image(x));
  std::sort(out.begin(), out.end());
  return out;
}

bool PartialBijection::is_identity() const {
  if (domain_size_ != size()) return false;
  for (int x = 0; x < size(); ++x)
    if (image(x) != x) return false;
  return true;
}

bool PartialBijection::is_projection() const {
  for (int x = 0; x < size(); ++x)
    if (defined(x) && image(x) != x) return false;
  return true;
}

bool PartialBijection::restriction_of(const PartialBijection& other) const {
  require_same_carrier(carrier_, other.carrier_, "restriction_of");
  for (int x = 0; x < size(); ++x)
    if (defined(x) && image(x) != other.image(x)) return false;
  return true;
}

PartialBijection PartialBijection::restricted(const std::vector<int>& points) const {
  std::vector<std::int32_t> map(map_.size(), kUndefined);
  for (int x : points)
    if (x >= 0 && x < size()) map[static_cast<std::size_t>(x)] = map_[static_cast<std::size_t>(x)];
  PartialBijection r;
  r.carrier_ = carrier_;
  r.map_ = std::move(map);
  r.domain_size_ = 0;
  for (std::int32_t y : r.map_)
    if (y != kUndefined) ++r.domain_size_;
  return r;
}

PartialBijection PartialBijection::inverse() const {
  PartialBijection r;
  r.carrier_ = carrier_;
  r.map_.assign(map_.size(), kUndefined);
  for (int x = 0; x < size(); ++x)
    if (defined(x)) r.map_[static_cast<std::size_t>(image(x))] = x;
  r.domain_size_ = domain_size_;
  return r;
}

bool PartialBijection::operator==(const PartialBijection& other) const {
  return map_ == other.map_;
}

bool PartialBijection::operator<(const PartialBijection& other) const {
  return map_ < other.map_;
}

std::uint64_t PartialBijection::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (std::int32_t y : map_) {
    for (int b = 0; b < 4; ++b) {
      h ^= static_cast<std::uint64_t>((static_cast<std::uint32_t>(y) >> (8 * b)) & 0xffu);
      h *= 1099511628211ull;
    }
  }
  return h;
}

std::string PartialBijection::to_string() const {
  std::string out = "{";
  bool first = true;
  for (int x = 0; x < size(); ++x) {
    if (!defined(x)) continue;
    if (!first) out += ", ";
    out += std::to_string(x) + "->" + std::to_string(image(x));
    first = false;
  }
  out += "}";
  return out;
}

PartialBijection compose(const PartialBijection& s, const PartialBijection& t) {
  require_same_carrier(s.carrier_, t.carrier_, "compose");
  PartialBijection r;
  r.carrier_ = s.carrier_;
  r.map_.assign(t.map_.size(), PartialBijection::kUndefined);
  int n = 0;
  for (int x = 0; x < t.size(); ++x) {
    const std::int32_t mid = t.map_[static_cast<std::size_t>(x)];
    if (mid == PartialBijection::kUndefined) continue;
    const std::int32_t y = s.map_[static_cast<std::size_t>(mid)];
    if (y == PartialBijection::kUndefined) continue;
    r.map_[static_cast<std::size_t>(x)] = y;
    ++n;
  }
  r.domain_size_ = n;
  return r;
}

int fixed_point_count(const PartialBijection& s) {
  int n = 0;
  for (int x = 0; x < s.size(); ++x)
    if (s.image(x) == x) ++n;
  return n;
}

int disagreement_count(const PartialBijection& s, const PartialBijection& t) {
  int n = 0;
  for (int x = 0; x < s.size(); ++x)
    if (s.image(x) != t.image(x)) ++n;
  return n;
}

Rational trace(const PartialBijection& s) {
  const Carrier& c = *s.carrier();
  if (c.is_uniform()) return c.uniform_measure(fixed_point_count(s));
  Rational total = 0;
  for (int x = 0; x < s.size(); ++x)
    if (s.image(x) == x) total += c.weight(x);
  return total;
}

Rational distance(const PartialBijection& s, const PartialBijection& t) {
  require_same_carrier(s.carrier(), t.carrier(), "distance");
  const Carrier& c = *s.carrier();
  if (c.is_uniform()) return c.uniform_measure(disagreement_count(s, t));
  Rational total = 0;
  for (int x = 0; x < s.size(); ++x)
    if (s.image(x) != t.image(x)) total += c.weight(x);
  return total;
}

Rational domain_measure(const PartialBijection& s) {
  const Carrier& c = *s.carrier();
  if (c.is_uniform()) return c.uniform_measure(s.domain_size());
  Rational total = 0;
  for (int x = 0; x < s.size(); ++x)
    if (s.defined(x)) total += c.weight(x);
  return total;
}

PartialBijection orthogonal_sum(const CarrierPtr& carrier,
                                std::span<const PartialBijection> parts) {
  const int d = carrier->size();
  std::vector<std::int32_t> map(static_cast<std::size_t>(d), PartialBijection::kUndefined);
  std::vector<int> dom_owner(static_cast<std::size_t>(d), -1);
  std::vector<int> ran_owner(static_cast<std::size_t>(d), -1);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    require_same_carrier(carrier, parts[i].carrier(), "orthogonal_sum");
    for (int x = 0; x < d; ++x) {
      if (!parts[i].defined(x)) continue;
      const int y = parts[i].image(x);
      if (dom_owner[static_cast<std::size_t>(x)] >= 0)
        throw OverlapError("orthogonal_sum: parts " +
                               std::to_string(dom_owner[static_cast<std::size_t>(x)]) +
                               " and " + std::to_string(i) + " share domain point " +
                               std::to_string(x),
                           static_cast<std::size_t>(dom_owner[static_cast<std::size_t>(x)]), i);
      if (ran_owner[static_cast<std::size_t>(y)] >= 0)
        throw OverlapError("orthogonal_sum: parts " +
                               std::to_string(ran_owner[static_cast<std::size_t>(y)]) +
                               " and " + std::to_string(i) + " share range point " +
                               std::to_string(y),
                           static_cast<std::size_t>(ran_owner[static_cast<std::size_t>(y)]), i);
      dom_owner[static_cast<std::size_t>(x)] = static_cast<int>(i);
      ran_owner[static_cast<std::size_t>(y)] = static_cast<int>(i);
      map[static_cast<std::size_t>(x)] = y;
    }
  }
  return PartialBijection(carrier, std::move(map));
}

PartialBijection generalized_sum(const CarrierPtr& carrier,
                                 std::span<const PartialBijection> parts) {
  const int d = carrier->size();
  // Pointwise realization of the two-sided sum projections: point x
  // contributes through part i exactly when no other part defines x and no
  // other part's range contains s_i(x).
  std::vector<int> dom_count(static_cast<std::size_t>(d), 0);
  std::vector<int> ran_count(static_cast<std::size_t>(d), 0);
  for (const PartialBijection& p : parts) {
    require_same_carrier(carrier, p.carrier(), "generalized_sum");
    for (int x = 0; x < d; ++x) {
      if (!p.defined(x)) continue;
      ++dom_count[static_cast<std::size_t>(x)];
      ++ran_count[static_cast<std::size_t>(p.image(x))];
    }
  }
  std::vector<std::int32_t> map(static_cast<std::size_t>(d), PartialBijection::kUndefined);
  for (const PartialBijection& p : parts) {
    for (int x = 0; x < d; ++x) {
      if (!p.defined(x)) continue;
      const int y = p.image(x);
      if (dom_count[static_cast<std::size_t>(x)] == 1 &&
          ran_count[static_cast<std::size_t>(y)] == 1)
        map[static_cast<std::size_t>(x)] = y;
    }
  }
  return PartialBijection(carrier, std::move(map));
}

namespace {

PartialBijection complement_projection(const PartialBijection& p) {
  std::vector<int> points;
  for (int x = 0; x < p.size(); ++x)
    if (!p.defined(x)) points.push_back(x);
  return PartialBijection::projection_on(p.carrier(), points);
}

}  // namespace

PartialBijection sum_projection(std::span<const PartialBijection> parts, std::size_t i) {
  const PartialBijection& s = parts[i];
  const CarrierPtr& carrier = s.carrier();
  PartialBijection inv = s.inverse();
  // Domain side: dom s_i minus every other domain.
  PartialBijection left = compose(inv, s);
  // Range side: ran s_i minus every other range, pulled back through s_i.
  PartialBijection right = compose(s, inv);
  for (std::size_t j = 0; j < parts.size(); ++j) {
    if (j == i) continue;
    require_same_carrier(carrier, parts[j].carrier(), "sum_projection");
    PartialBijection jinv = parts[j].inverse();
    left = compose(left, complement_projection(compose(jinv, parts[j])));
    right = compose(right, complement_projection(compose(parts[j], jinv)));
  }
  return compose(left, compose(inv, compose(right, s)));
}

BigInt partial_bijection_count(int d) {
  BigInt total = 0;
  for (int j = 0; j <= d; ++j) {
    BigInt b = binomial(static_cast<unsigned long>(d), static_cast<unsigned long>(j));
    total += b * b * factorial(static_cast<unsigned long>(j));
  }
  return total;
}

namespace {

void emit_images(const CarrierPtr& carrier, const std::vector<int>& domain,
                 std::size_t depth, std::vector<std::int32_t>& map,
                 std::vector<char>& used, std::vector<PartialBijection>& out) {
  if (depth == domain.size()) {
    out.push_back(PartialBijection(carrier, map));
    return;
  }
  const int d = carrier->size();
  const int x = domain[depth];
  for (int y = 0; y < d; ++y) {
    if (used[static_cast<std::size_t>(y)]) continue;
    used[static_cast<std::size_t>(y)] = 1;
    map[static_cast<std::size_t>(x)] = y;
    emit_images(carrier, domain, depth + 1, map, used, out);
    map[static_cast<std::size_t>(x)] = PartialBijection::kUndefined;
    used[static_cast<std::size_t>(y)] = 0;
  }
}

}  // namespace

std::vector<PartialBijection> enumerate_all(const CarrierPtr& carrier, std::uint64_t cap) {
  const int d = carrier->size();
  BigInt total = partial_bijection_count(d);
  if (total > BigInt(static_cast<unsigned long>(cap)))
    throw CapExceeded("enumerate_all: |[[" + std::to_string(d) + "]]| = " +
                      total.get_str() + " exceeds cap " + std::to_string(cap));
  std::vector<PartialBijection> out;
  out.reserve(static_cast<std::size_t>(total.get_ui()));
  std::vector<std::int32_t> map(static_cast<std::size_t>(d), PartialBijection::kUndefined);
  std::vector<char> used(static_cast<std::size_t>(d), 0);
  const std::uint64_t mask_end = 1ull << d;
  for (std::uint64_t mask = 0; mask < mask_end; ++mask) {
    std::vector<int> domain;
    for (int x = 0; x < d; ++x)
      if (mask & (1ull << x)) domain.push_back(x);
    emit_images(carrier, domain, 0, map, used, out);
  }
  return out;
}

}  // namespace soficlab
