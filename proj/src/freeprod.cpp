#include "soficlab/freeprod.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <utility>

#include "soficlab/errors.hpp"

namespace soficlab {

namespace {

// Least d making every weight * d integral; the modulus reported when a
// block embedding cannot exist at the requested size.
long weight_divisor(const CarrierPtr& carrier) {
  BigInt lcm = 1;
  for (int x = 0; x < carrier->size(); ++x) {
    Rational w = carrier->weight(x);
    w.canonicalize();
    mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), w.get_den().get_mpz_t());
  }
  if (!lcm.fits_slong_p()) throw ValidationError("weight denominators overflow");
  return lcm.get_si();
}

void check_commutes(const PartialBijection& theta, const std::vector<PartialBijection>& image) {
  for (const auto& t : image)
    if (compose(theta, t) != compose(t, theta))
      throw std::logic_error("sampled permutation fails to commute with the embedded image");
}

}  // namespace

EmbeddedSemigroup EmbeddedSemigroup::trivial(int d) {
  if (d < 1) throw ValidationError("target size must be positive");
  EmbeddedSemigroup g;
  g.carrier_ = Carrier::uniform(d);
  g.image_ = {PartialBijection::from_pairs(g.carrier_, {}),
              PartialBijection::identity(g.carrier_)};
  g.orbits_ = FinRelation::identity_uniform(d);
  g.order_ = factorial(static_cast<unsigned long>(d));
  g.groups_.emplace_back();
  for (int x = 0; x < d; ++x) g.groups_.front().push_back({x});
  return g;
}

EmbeddedSemigroup EmbeddedSemigroup::block(const FinRelation& g_rel, int d) {
  if (d < 1) throw ValidationError("target size must be positive");
  const int g = g_rel.size();
  std::vector<long> block_size(static_cast<std::size_t>(g));
  for (int x = 0; x < g; ++x) {
    Rational share = g_rel.carrier()->weight(x) * d;
    share.canonicalize();
    if (share.get_den() != 1)
      throw DivisibilityError("no block embedding: point " + std::to_string(x) +
                                  " would receive a fractional share of " + std::to_string(d) +
                                  " target points",
                              weight_divisor(g_rel.carrier()));
    block_size[static_cast<std::size_t>(x)] = share.get_num().get_si();
  }

  EmbeddedSemigroup out;
  out.carrier_ = Carrier::uniform(d);
  std::vector<std::vector<int>> slots(static_cast<std::size_t>(g));
  int next = 0;
  for (int x = 0; x < g; ++x)
    for (long i = 0; i < block_size[static_cast<std::size_t>(x)]; ++i)
      slots[static_cast<std::size_t>(x)].push_back(next++);

  const std::vector<PartialBijection> pseudo = full_pseudogroup(g_rel);
  out.image_.reserve(pseudo.size());
  for (const auto& t : pseudo) {
    std::vector<std::int32_t> map(static_cast<std::size_t>(d), PartialBijection::kUndefined);
    for (int x = 0; x < g; ++x) {
      const int y = t.image(x);
      if (y < 0) continue;
      const auto& sx = slots[static_cast<std::size_t>(x)];
      const auto& sy = slots[static_cast<std::size_t>(y)];
      for (std::size_t i = 0; i < sx.size(); ++i)
        map[static_cast<std::size_t>(sx[i])] = sy[i];
    }
    out.image_.emplace_back(out.carrier_, std::move(map));
  }

  // Certify exactness of the embedding: traces and all products.
  std::map<std::vector<std::int32_t>, std::size_t> index_of;
  for (std::size_t i = 0; i < pseudo.size(); ++i) index_of.emplace(pseudo[i].mapping(), i);
  for (std::size_t i = 0; i < pseudo.size(); ++i) {
    if (trace(out.image_[i]) != trace(pseudo[i]))
      throw std::logic_error("block embedding broke a trace");
    for (std::size_t j = 0; j < pseudo.size(); ++j) {
      const auto it = index_of.find(compose(pseudo[i], pseudo[j]).mapping());
      if (it == index_of.end()) throw std::logic_error("pseudogroup not closed under products");
      if (compose(out.image_[i], out.image_[j]) != out.image_[it->second])
        throw std::logic_error("block embedding broke a product");
    }
  }

  // One orbit per slot of each class; orbits of one class share a type. The
  // embedded semigroup is the full pseudogroup of g_rel, so its idempotents
  // separate classes and orbits of different classes are never equivariantly
  // isomorphic.
  std::vector<std::vector<int>> orbit_classes;
  BigInt order = 1;
  for (const auto& cls : g_rel.classes()) {
    const long m = block_size[static_cast<std::size_t>(cls.front())];
    out.groups_.emplace_back();
    for (long i = 0; i < m; ++i) {
      std::vector<int> orbit;
      for (int x : cls) orbit.push_back(slots[static_cast<std::size_t>(x)][static_cast<std::size_t>(i)]);
      out.groups_.back().push_back(orbit);
      orbit_classes.push_back(orbit);
    }
    order *= factorial(static_cast<unsigned long>(m));
  }
  out.orbits_ = FinRelation(out.carrier_, std::move(orbit_classes));
  out.order_ = order;
  return out;
}

CentralizerSampler::CentralizerSampler(EmbeddedSemigroup g, std::uint64_t seed)
    : g_(std::move(g)), seed_(seed) {}

PartialBijection CentralizerSampler::sample(std::uint64_t index) const {
  RngStream rng(seed_, index);
  const int d = g_.d();
  std::vector<std::int32_t> map(static_cast<std::size_t>(d), PartialBijection::kUndefined);
  for (const auto& group : g_.orbit_groups()) {
    std::vector<std::size_t> target(group.size());
    std::iota(target.begin(), target.end(), std::size_t{0});
    rng.shuffle(target);
    for (std::size_t o = 0; o < group.size(); ++o) {
      const auto& from = group[o];
      const auto& to = group[target[o]];
      for (std::size_t p = 0; p < from.size(); ++p)
        map[static_cast<std::size_t>(from[p])] = to[p];
    }
  }
  PartialBijection theta(g_.target(), std::move(map));
  check_commutes(theta, g_.image());
  return theta;
}

std::vector<PartialBijection> CentralizerSampler::sample_many(std::size_t count) const {
  std::vector<PartialBijection> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample(i));
  return out;
}

Residual residual(const PartialBijection& phi, const FinRelation& E) {
  if (phi.size() != E.size())
    throw CarrierMismatch("residual: map and relation live on different carriers");
  std::vector<std::int32_t> map(static_cast<std::size_t>(phi.size()),
                                PartialBijection::kUndefined);
  for (int x = 0; x < phi.size(); ++x) {
    const int y = phi.image(x);
    if (y >= 0 && E.same_class(x, y)) map[static_cast<std::size_t>(x)] = y;
  }
  Residual out{PartialBijection(phi.carrier(), std::move(map)), 0};
  out.size = domain_measure(out.restriction);
  return out;
}

ConcentrationReport concentration_experiment(const std::vector<PartialBijection>& phis,
                                             const std::vector<PartialBijection>& psis,
                                             const EmbeddedSemigroup& g, const Rational& C,
                                             const Rational& epsilon, std::size_t samples,
                                             std::uint64_t seed, int workers) {
  if (phis.empty() || phis.size() != psis.size())
    throw ValidationError("need equally many phi and psi parts, at least one each");
  if (samples < 1) throw ValidationError("need at least one sample");
  for (const auto& v : phis)
    if (v.size() != g.d()) throw CarrierMismatch("phi part not on the embedding's carrier");
  for (const auto& v : psis)
    if (v.size() != g.d()) throw CarrierMismatch("psi part not on the embedding's carrier");

  const FinRelation& E = g.orbit_relation();
  Rational max_res = 0;
  for (const auto& v : phis) max_res = std::max(max_res, residual(v, E).size);
  for (const auto& v : psis) max_res = std::max(max_res, residual(v, E).size);

  ConcentrationReport report;
  report.d = g.d();
  report.samples = samples;
  report.seed = seed;
  report.epsilon = epsilon;
  report.threshold_constant = C;
  report.threshold = C * max_res + epsilon;

  const CentralizerSampler sampler(g, seed);
  const PartialBijection one = PartialBijection::identity(g.target());
  auto run = [&](std::size_t lo, std::size_t hi) {
    long hits = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      const PartialBijection theta = sampler.sample(i);
      const PartialBijection theta_inv = theta.inverse();
      PartialBijection acc = one;
      for (std::size_t k = 0; k < phis.size(); ++k) {
        acc = compose(acc, phis[k]);
        acc = compose(acc, theta);
        acc = compose(acc, psis[k]);
        acc = compose(acc, theta_inv);
      }
      if (residual(acc, E).size < report.threshold) ++hits;
    }
    return hits;
  };

  const int W = static_cast<int>(
      std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)),
                                                     samples)));
  long successes = 0;
  if (W == 1) {
    successes = run(0, samples);
  } else {
    std::vector<long> partial(static_cast<std::size_t>(W), 0);
    std::vector<std::thread> threads;
    for (int w = 0; w < W; ++w) {
      const std::size_t lo = samples * static_cast<std::size_t>(w) / static_cast<std::size_t>(W);
      const std::size_t hi =
          samples * static_cast<std::size_t>(w + 1) / static_cast<std::size_t>(W);
      threads.emplace_back(
          [&, w, lo, hi]() { partial[static_cast<std::size_t>(w)] = run(lo, hi); });
    }
    for (auto& t : threads) t.join();
    for (long p : partial) successes += p;
  }

  report.successes = successes;
  report.fraction = Rational(successes, static_cast<unsigned long>(samples));
  report.fraction.canonicalize();
  return report;
}

PhiThetaReport phi_theta(const MicrostateAssignment& phi1, const SigmaBall& ball1,
                         const MicrostateAssignment& phi2, const SigmaBall& ball2,
                         const PartialBijection& theta,
                         const std::vector<PartialBijection>& shared_g,
                         const std::vector<AltWord>& words) {
  const int d = theta.size();
  if (phi1.target->size() != d || phi2.target->size() != d)
    throw CarrierMismatch("phi_theta: microstates and theta disagree on the target size");
  if (theta.domain_size() != d)
    throw ValidationError("phi_theta: theta must be a full permutation");
  for (const auto& g : shared_g) {
    const auto i1 = ball1.index_of(g);
    const auto i2 = ball2.index_of(g);
    if (!i1 || !i2)
      throw ValidationError("phi_theta: a shared element is missing from a ball");
    const PartialBijection& v1 = phi1.values[static_cast<std::size_t>(*i1)];
    const PartialBijection& v2 = phi2.values[static_cast<std::size_t>(*i2)];
    if (v1 != v2)
      throw ValidationError("phi_theta: the microstates disagree on a shared element");
    if (compose(theta, v1) != compose(v1, theta))
      throw ValidationError("phi_theta: theta does not commute with the shared image");
  }

  const PartialBijection theta_inv = theta.inverse();
  PhiThetaReport report;
  report.values.reserve(words.size());
  report.trace_defects.reserve(words.size());
  for (const auto& word : words) {
    PartialBijection acc = PartialBijection::identity(phi1.target);
    for (const auto& letter : word.letters) {
      if (letter.side != 1 && letter.side != 2)
        throw ValidationError("phi_theta: letter side must be 1 or 2");
      const auto& values = letter.side == 1 ? phi1.values : phi2.values;
      if (letter.index < 0 || static_cast<std::size_t>(letter.index) >= values.size())
        throw ValidationError("phi_theta: letter index out of range");
      const PartialBijection& base = values[static_cast<std::size_t>(letter.index)];
      if (letter.side == 1) {
        acc = compose(acc, base);
      } else {
        acc = compose(acc, compose(compose(theta, base), theta_inv));
      }
    }
    Rational defect = trace(acc) - word.target_trace;
    defect = abs(defect);
    report.max_trace_defect = std::max(report.max_trace_defect, defect);
    report.values.push_back(std::move(acc));
    report.trace_defects.push_back(std::move(defect));
  }
  return report;
}

SplittingReport splitting_check(const FinRelation& R, const GeneratorSet& F1,
                                const GeneratorSet& F2,
                                const std::vector<PartialBijection>& anchor,
                                const EmbeddedSemigroup& target_g, int n,
                                const Rational& delta, const CountOptions& opts) {
  if (F1.carrier()->size() != R.size() || F2.carrier()->size() != R.size())
    throw CarrierMismatch("splitting_check: generator sets must live on the relation");
  std::map<std::string, PartialBijection> merged = F1.generators();
  for (const auto& [name, value] : F2.generators())
    if (!merged.emplace(name, value).second)
      throw ValidationError("splitting_check: generator name '" + name +
                            "' appears on both sides");
  const GeneratorSet both(R, std::move(merged));

  const int d = target_g.d();
  CountOptions o = opts;
  o.delta = delta;
  SplittingReport report;
  report.d = d;
  report.left_count = count_anchored(F1, n, d, anchor, o).count;
  report.right_count = count_anchored(F2, n, d, anchor, o).count;
  report.union_count = count_anchored(both, n, d, anchor, o).count;
  report.centralizer = target_g.centralizer_order();
  report.lhs = Rational(report.union_count);
  report.rhs = Rational(report.left_count * report.right_count * report.centralizer) /
               Rational(factorial(static_cast<unsigned long>(d)));
  report.holds = report.lhs <= report.rhs;
  return report;
}

}  // namespace soficlab
