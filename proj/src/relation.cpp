#include "soficlab/relation.hpp"

#include <algorithm>

#include "soficlab/errors.hpp"

namespace soficlab {

FinRelation::FinRelation(CarrierPtr carrier, std::vector<std::vector<int>> classes)
    : carrier_(std::move(carrier)), classes_(std::move(classes)) {
  const int d = carrier_->size();
  class_index_.assign(static_cast<std::size_t>(d), -1);
  for (auto& cls : classes_) {
    if (cls.empty()) throw BadPartition("empty class in partition");
    std::sort(cls.begin(), cls.end());
    for (int x : cls) {
      if (x < 0 || x >= d)
        throw BadPartition("class point " + std::to_string(x) + " out of range");
      if (class_index_[static_cast<std::size_t>(x)] != -1)
        throw BadPartition("point " + std::to_string(x) + " appears in two classes");
      class_index_[static_cast<std::size_t>(x)] = 0;  // provisional marker
    }
  }
  for (int x = 0; x < d; ++x)
    if (class_index_[static_cast<std::size_t>(x)] == -1)
      throw BadPartition("point " + std::to_string(x) + " not covered by any class");
  std::sort(classes_.begin(), classes_.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) {
              return a.front() < b.front();
            });
  for (std::size_t c = 0; c < classes_.size(); ++c)
    for (int x : classes_[c]) class_index_[static_cast<std::size_t>(x)] = static_cast<int>(c);

  fd_measure_ = 0;
  for (const auto& cls : classes_) {
    const Rational& w = carrier_->weight(cls.front());
    for (int x : cls)
      if (carrier_->weight(x) != w)
        throw UnequalClassWeights("points " + std::to_string(cls.front()) + " and " +
                                  std::to_string(x) +
                                  " share a class but have different weights");
    mu_by_size_[static_cast<int>(cls.size())] += w;
    fd_measure_ += w;
  }
}

FinRelation FinRelation::full_uniform(int d) {
  std::vector<int> all(static_cast<std::size_t>(d));
  for (int x = 0; x < d; ++x) all[static_cast<std::size_t>(x)] = x;
  return FinRelation(Carrier::uniform(d), {all});
}

FinRelation FinRelation::identity_uniform(int d) {
  std::vector<std::vector<int>> classes;
  for (int x = 0; x < d; ++x) classes.push_back({x});
  return FinRelation(Carrier::uniform(d), std::move(classes));
}

int FinRelation::class_of(int x) const {
  if (x < 0 || x >= size()) throw ValidationError("point out of range");
  return class_index_[static_cast<std::size_t>(x)];
}

bool FinRelation::same_class(int x, int y) const { return class_of(x) == class_of(y); }

bool FinRelation::contains(const PartialBijection& s) const {
  if (!carrier_->same_as(*s.carrier())) return false;
  for (int x = 0; x < size(); ++x) {
    const int y = s.image(x);
    if (y >= 0 && !same_class(x, y)) return false;
  }
  return true;
}

std::map<int, long> FinRelation::class_size_counts() const {
  std::map<int, long> counts;
  for (const auto& cls : classes_) ++counts[static_cast<int>(cls.size())];
  return counts;
}

BigInt FinRelation::pseudogroup_size() const {
  BigInt total = 1;
  for (const auto& cls : classes_)
    total *= partial_bijection_count(static_cast<int>(cls.size()));
  return total;
}

FinRelation build_relation(std::vector<Rational> weights,
                           std::vector<std::vector<int>> classes) {
  return FinRelation(Carrier::weighted(std::move(weights)), std::move(classes));
}

std::vector<PartialBijection> full_pseudogroup(const FinRelation& R, const BigInt& cap) {
  if (R.pseudogroup_size() > cap)
    throw CapExceeded("pseudogroup has " + bigint_to_string(R.pseudogroup_size()) +
                      " elements, cap is " + bigint_to_string(cap));
  const int d = R.size();
  // Local enumerations per class, remapped to global point indices.
  std::vector<std::vector<PartialBijection>> locals;
  for (const auto& cls : R.classes()) {
    const int k = static_cast<int>(cls.size());
    std::vector<PartialBijection> remapped;
    for (const auto& local : enumerate_all(Carrier::uniform(k))) {
      std::vector<std::pair<int, int>> pairs;
      for (int i = 0; i < k; ++i)
        if (local.defined(i))
          pairs.emplace_back(cls[static_cast<std::size_t>(i)],
                             cls[static_cast<std::size_t>(local.image(i))]);
      remapped.push_back(PartialBijection::from_pairs(R.carrier(), pairs));
    }
    locals.push_back(std::move(remapped));
  }
  // Odometer over per-class choices; the last class varies fastest.
  std::vector<std::size_t> idx(locals.size(), 0);
  std::vector<PartialBijection> out;
  while (true) {
    std::vector<std::int32_t> map(static_cast<std::size_t>(d), PartialBijection::kUndefined);
    for (std::size_t c = 0; c < locals.size(); ++c) {
      const PartialBijection& part = locals[c][idx[c]];
      for (int x = 0; x < d; ++x)
        if (part.defined(x)) map[static_cast<std::size_t>(x)] = part.image(x);
    }
    out.emplace_back(R.carrier(), std::move(map));
    std::size_t c = locals.size();
    while (c > 0) {
      --c;
      if (++idx[c] < locals[c].size()) break;
      idx[c] = 0;
      if (c == 0) return out;
    }
    if (locals.empty()) return out;
  }
}

GeneratorSet::GeneratorSet(const FinRelation& R,
                           std::map<std::string, PartialBijection> generators)
    : carrier_(R.carrier()), generators_(std::move(generators)) {
  for (const auto& [name, s] : generators_) {
    if (!carrier_->same_as(*s.carrier()))
      throw CarrierMismatch("generator '" + name + "' lives on a different carrier");
    for (int x = 0; x < R.size(); ++x) {
      const int y = s.image(x);
      if (y >= 0 && !R.same_class(x, y))
        throw ValidationError("generator '" + name + "' maps " + std::to_string(x) +
                              " to " + std::to_string(y) +
                              ", which crosses classes");
    }
  }
}

std::string GeneratorSet::Letter::label() const {
  switch (kind) {
    case Kind::identity:
      return "1";
    case Kind::generator:
      return name;
    case Kind::inverse:
      return name + "^-1";
  }
  return "?";
}

std::vector<GeneratorSet::Letter> GeneratorSet::symmetrized() const {
  std::vector<Letter> letters;
  auto seen = [&letters](const PartialBijection& v) {
    for (const auto& l : letters)
      if (l.value == v) return true;
    return false;
  };
  letters.push_back({Letter::Kind::identity, "", PartialBijection::identity(carrier_)});
  for (const auto& [name, s] : generators_)
    if (!seen(s)) letters.push_back({Letter::Kind::generator, name, s});
  for (const auto& [name, s] : generators_) {
    PartialBijection inv = s.inverse();
    if (!seen(inv)) letters.push_back({Letter::Kind::inverse, name, std::move(inv)});
  }
  return letters;
}

Rational cost(const GeneratorSet& F) {
  Rational total = 0;
  for (const auto& [name, s] : F.generators()) {
    (void)name;
    total += domain_measure(s);
  }
  return total;
}

namespace {

bool orthogonal(const PartialBijection& a, const PartialBijection& b) {
  const int d = a.size();
  for (int x = 0; x < d; ++x)
    if (a.defined(x) && b.defined(x)) return false;
  std::vector<char> ran_a(static_cast<std::size_t>(d), 0);
  for (int x = 0; x < d; ++x)
    if (a.defined(x)) ran_a[static_cast<std::size_t>(a.image(x))] = 1;
  for (int x = 0; x < d; ++x)
    if (b.defined(x) && ran_a[static_cast<std::size_t>(b.image(x))]) return false;
  return true;
}

PartialBijection disjoint_union(const CarrierPtr& c, const PartialBijection& a,
                                const PartialBijection& b) {
  std::vector<std::int32_t> map(static_cast<std::size_t>(c->size()),
                                PartialBijection::kUndefined);
  for (int x = 0; x < c->size(); ++x) {
    if (a.defined(x)) map[static_cast<std::size_t>(x)] = a.image(x);
    if (b.defined(x)) map[static_cast<std::size_t>(x)] = b.image(x);
  }
  return PartialBijection(c, std::move(map));
}

}  // namespace

std::optional<int> SigmaBall::index_of(const PartialBijection& value) const {
  auto it = by_hash_.find(value.hash());
  if (it == by_hash_.end()) return std::nullopt;
  for (int i : it->second)
    if (elements_[static_cast<std::size_t>(i)].value == value) return i;
  return std::nullopt;
}

PartialBijection SigmaBall::reevaluate(int element_index) const {
  const Element& e = elements_.at(static_cast<std::size_t>(element_index));
  std::vector<PartialBijection> parts;
  for (int w : e.words) {
    const Word& word = words_[static_cast<std::size_t>(w)];
    PartialBijection product = PartialBijection::identity(carrier_);
    for (int l : word.letters)
      product = compose(product, letters_[static_cast<std::size_t>(l)].value);
    parts.push_back(std::move(product));
  }
  return orthogonal_sum(carrier_, parts);
}

SigmaBall sigma_ball(const GeneratorSet& F, int n, std::size_t cap) {
  if (n < 1) throw ValidationError("ball radius must be at least 1");
  SigmaBall ball;
  ball.radius_ = n;
  ball.carrier_ = F.carrier();
  ball.letters_ = F.symmetrized();

  // Word closure: breadth-first by word length; only the first word reaching
  // a value is kept, and longer words extend previously kept ones (sound
  // because products depend only on values).
  std::unordered_map<std::uint64_t, std::vector<int>> word_index;
  auto find_word = [&](const PartialBijection& v) -> int {
    auto it = word_index.find(v.hash());
    if (it == word_index.end()) return -1;
    for (int i : it->second)
      if (ball.words_[static_cast<std::size_t>(i)].value == v) return i;
    return -1;
  };
  auto push_word = [&](std::vector<int> letters, PartialBijection value) {
    if (ball.words_.size() >= cap)
      throw CapExceeded("word ball exceeds cap of " + std::to_string(cap));
    word_index[value.hash()].push_back(static_cast<int>(ball.words_.size()));
    ball.words_.push_back({std::move(letters), std::move(value)});
  };
  std::size_t level_begin = 0;
  for (std::size_t l = 0; l < ball.letters_.size(); ++l)
    if (find_word(ball.letters_[l].value) < 0)
      push_word({static_cast<int>(l)}, ball.letters_[l].value);
  for (int length = 2; length <= n; ++length) {
    const std::size_t level_end = ball.words_.size();
    for (std::size_t w = level_begin; w < level_end; ++w)
      for (std::size_t l = 0; l < ball.letters_.size(); ++l) {
        PartialBijection v =
            compose(ball.words_[w].value, ball.letters_[l].value);
        if (find_word(v) >= 0) continue;
        std::vector<int> letters = ball.words_[w].letters;
        letters.push_back(static_cast<int>(l));
        push_word(std::move(letters), std::move(v));
      }
    if (ball.words_.size() == level_end) break;  // multiplicatively stable
    level_begin = level_end;
  }

  // Sum closure: breadth-first by arity; sums extend by a strictly larger
  // word index (repeating a nonzero part can never be orthogonal).
  auto push_element = [&](std::vector<int> words, PartialBijection value) {
    if (ball.elements_.size() >= cap)
      throw CapExceeded("sum ball exceeds cap of " + std::to_string(cap));
    ball.by_hash_[value.hash()].push_back(static_cast<int>(ball.elements_.size()));
    ball.elements_.push_back({std::move(words), std::move(value)});
  };
  push_element({}, PartialBijection::zero(ball.carrier_));  // the empty sum
  std::size_t arity_begin = ball.elements_.size();
  for (std::size_t w = 0; w < ball.words_.size(); ++w)
    if (!ball.index_of(ball.words_[w].value).has_value())
      push_element({static_cast<int>(w)}, ball.words_[w].value);
  while (true) {
    const std::size_t arity_end = ball.elements_.size();
    for (std::size_t e = arity_begin; e < arity_end; ++e)
      for (std::size_t w =
               static_cast<std::size_t>(ball.elements_[e].words.back()) + 1;
           w < ball.words_.size(); ++w) {
        if (!orthogonal(ball.elements_[e].value, ball.words_[w].value)) continue;
        PartialBijection v = disjoint_union(ball.carrier_, ball.elements_[e].value,
                                            ball.words_[w].value);
        if (ball.index_of(v).has_value()) continue;
        std::vector<int> words = ball.elements_[e].words;
        words.push_back(static_cast<int>(w));
        push_element(std::move(words), std::move(v));
      }
    if (ball.elements_.size() == arity_end) break;
    arity_begin = arity_end;
  }

  ball.zero_index_ = *ball.index_of(PartialBijection::zero(ball.carrier_));
  ball.one_index_ = *ball.index_of(PartialBijection::identity(ball.carrier_));
  return ball;
}

std::vector<PartialBijection> word_ball(const GeneratorSet& F, int n, std::size_t cap) {
  SigmaBall ball = sigma_ball(F, n, cap);
  std::vector<PartialBijection> out;
  out.reserve(ball.words().size());
  for (const auto& w : ball.words()) out.push_back(w.value);
  return out;
}

int stabilization_radius(const GeneratorSet& F, std::size_t cap) {
  std::size_t prev = sigma_ball(F, 1, cap).size();
  for (int n = 1;; ++n) {
    const std::size_t next = sigma_ball(F, n + 1, cap).size();
    if (next == prev) return n;
    prev = next;
  }
}

bool is_dynamical_generating(const GeneratorSet& F, const FinRelation& R,
                             std::size_t cap) {
  if (R.pseudogroup_size() > BigInt(static_cast<unsigned long>(cap)))
    throw CapExceeded("pseudogroup larger than cap");
  const int n = stabilization_radius(F, cap);
  const SigmaBall closure = sigma_ball(F, n, cap);
  return BigInt(static_cast<unsigned long>(closure.size())) == R.pseudogroup_size();
}

}  // namespace soficlab
