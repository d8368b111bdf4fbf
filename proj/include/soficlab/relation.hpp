#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "soficlab/carrier.hpp"
#include "soficlab/pperm.hpp"

namespace soficlab {

// A finite measured equivalence relation: a weighted carrier partitioned into
// classes. All points of a class must carry the same weight, so that every
// partial bijection moving points within classes preserves the measure.
class FinRelation {
 public:
  FinRelation(CarrierPtr carrier, std::vector<std::vector<int>> classes);

  static FinRelation full_uniform(int d);      // one class covering everything
  static FinRelation identity_uniform(int d);  // all classes singletons

  const CarrierPtr& carrier() const { return carrier_; }
  int size() const { return carrier_->size(); }
  // Classes are stored sorted internally and ordered by smallest member.
  const std::vector<std::vector<int>>& classes() const { return classes_; }
  int class_of(int x) const;
  bool same_class(int x, int y) const;
  // True iff the graph of s lies inside the relation.
  bool contains(const PartialBijection& s) const;

  // cardinality -> number of classes of that cardinality
  std::map<int, long> class_size_counts() const;
  // cardinality -> total transversal measure of classes of that cardinality
  const std::map<int, Rational>& transversal_by_size() const { return mu_by_size_; }
  // Measure of a transversal (one point per class).
  const Rational& transversal_measure() const { return fd_measure_; }

  // Number of partial bijections whose graph lies inside the relation.
  BigInt pseudogroup_size() const;

 private:
  CarrierPtr carrier_;
  std::vector<std::vector<int>> classes_;
  std::vector<int> class_index_;
  std::map<int, Rational> mu_by_size_;
  Rational fd_measure_;
};

FinRelation build_relation(std::vector<Rational> weights,
                           std::vector<std::vector<int>> classes);

// Every partial bijection inside R, in deterministic order: classes are
// filled independently, later classes vary fastest, and within a class the
// local order is the enumerate_all order on the class points.
std::vector<PartialBijection> full_pseudogroup(const FinRelation& R,
                                               const BigInt& cap = BigInt(1000000));

// A named finite generating family inside a relation.
class GeneratorSet {
 public:
  GeneratorSet(const FinRelation& R, std::map<std::string, PartialBijection> generators);

  const CarrierPtr& carrier() const { return carrier_; }
  const std::map<std::string, PartialBijection>& generators() const { return generators_; }
  std::size_t size() const { return generators_.size(); }

  struct Letter {
    enum class Kind { identity, generator, inverse };
    Kind kind;
    std::string name;  // generator name; empty for the identity letter
    PartialBijection value;
    std::string label() const;
  };
  // The symmetrization: identity first, then generators by name, then their
  // inverses (deduplicated against every earlier letter by value).
  std::vector<Letter> symmetrized() const;

 private:
  CarrierPtr carrier_;
  std::map<std::string, PartialBijection> generators_;
};

// Sum of generator domain measures.
Rational cost(const GeneratorSet& F);

// The radius-n word/sum closure of a generator set. Words are products of at
// most n letters of the symmetrization (padding by the identity letter);
// elements are orthogonal sums of distinct words. Each word and each element
// stores one provenance: the first decomposition found in search order
// (words by length then lexicographic extension; sums by arity then
// lexicographic word-index extension). Element 0 is the empty sum (the zero
// map) and element 1 is the identity.
class SigmaBall {
 public:
  struct Word {
    std::vector<int> letters;  // indices into letters(), product left to right
    PartialBijection value;
  };
  struct Element {
    std::vector<int> words;  // strictly increasing indices into words()
    PartialBijection value;
  };

  int radius() const { return radius_; }
  const CarrierPtr& carrier() const { return carrier_; }
  const std::vector<GeneratorSet::Letter>& letters() const { return letters_; }
  const std::vector<Word>& words() const { return words_; }
  const std::vector<Element>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }

  std::optional<int> index_of(const PartialBijection& value) const;
  // Recompute an element from its stored provenance (letter products, then
  // the orthogonal sum). Used to certify decomposition soundness.
  PartialBijection reevaluate(int element_index) const;

  int zero_index() const { return zero_index_; }
  int one_index() const { return one_index_; }

 private:
  friend SigmaBall sigma_ball(const GeneratorSet&, int, std::size_t);
  int radius_ = 0;
  CarrierPtr carrier_;
  std::vector<GeneratorSet::Letter> letters_;
  std::vector<Word> words_;
  std::vector<Element> elements_;
  std::unordered_map<std::uint64_t, std::vector<int>> by_hash_;
  int zero_index_ = -1;
  int one_index_ = -1;
};

std::vector<PartialBijection> word_ball(const GeneratorSet& F, int n,
                                        std::size_t cap = 1000000);
SigmaBall sigma_ball(const GeneratorSet& F, int n, std::size_t cap = 1000000);

// Smallest n at which sigma_ball(F, n) stops growing (its fixed point is the
// full word/sum closure of F).
int stabilization_radius(const GeneratorSet& F, std::size_t cap = 1000000);

// True iff the stabilized closure of F is all of R's pseudogroup.
bool is_dynamical_generating(const GeneratorSet& F, const FinRelation& R,
                             std::size_t cap = 1000000);

}  // namespace soficlab
