#include "soficlab/microstates.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <set>
#include <thread>
#include <utility>

#include "soficlab/errors.hpp"

namespace soficlab {

bool passes_threshold(const Rational& defect, const Rational& delta) {
  return defect < delta || sgn(defect) == 0;
}

bool DefectReport::passes(const Rational& delta) const {
  return passes_threshold(mult_defect, delta) && passes_threshold(trace_defect, delta);
}

std::string to_string(CountMode mode) {
  switch (mode) {
    case CountMode::canonical:
      return "canonical";
    case CountMode::exact:
      return "exact";
    case CountMode::anchored:
      return "anchored";
  }
  return "?";
}

std::vector<std::tuple<int, int, int>> product_table(const SigmaBall& ball) {
  std::vector<std::tuple<int, int, int>> table;
  const int B = static_cast<int>(ball.size());
  for (int i = 0; i < B; ++i)
    for (int j = 0; j < B; ++j) {
      PartialBijection v = compose(ball.elements()[static_cast<std::size_t>(i)].value,
                                   ball.elements()[static_cast<std::size_t>(j)].value);
      if (auto k = ball.index_of(v)) table.emplace_back(i, j, *k);
    }
  return table;
}

MicrostateAssignment canonical_extend(const std::map<std::string, PartialBijection>& psi,
                                      const SigmaBall& ball, const CarrierPtr& target) {
  std::vector<PartialBijection> letter_images;
  for (const auto& letter : ball.letters()) {
    if (letter.kind == GeneratorSet::Letter::Kind::identity) {
      letter_images.push_back(PartialBijection::identity(target));
      continue;
    }
    auto it = psi.find(letter.name);
    if (it == psi.end())
      throw ValidationError("assignment missing generator '" + letter.name + "'");
    require_same_carrier(it->second.carrier(), target, "canonical_extend");
    letter_images.push_back(letter.kind == GeneratorSet::Letter::Kind::generator
                                ? it->second
                                : it->second.inverse());
  }
  std::vector<PartialBijection> word_images;
  word_images.reserve(ball.words().size());
  for (const auto& w : ball.words()) {
    PartialBijection v = letter_images[static_cast<std::size_t>(w.letters.front())];
    for (std::size_t i = 1; i < w.letters.size(); ++i)
      v = compose(v, letter_images[static_cast<std::size_t>(w.letters[i])]);
    word_images.push_back(std::move(v));
  }
  MicrostateAssignment phi{target, {}};
  phi.values.reserve(ball.size());
  for (const auto& e : ball.elements()) {
    std::vector<PartialBijection> parts;
    parts.reserve(e.words.size());
    for (int w : e.words) parts.push_back(word_images[static_cast<std::size_t>(w)]);
    phi.values.push_back(generalized_sum(target, parts));
  }
  return phi;
}

DefectReport defects(const MicrostateAssignment& phi, const SigmaBall& ball) {
  if (phi.values.size() != ball.size())
    throw ValidationError("assignment covers " + std::to_string(phi.values.size()) +
                          " elements, ball has " + std::to_string(ball.size()));
  DefectReport report;
  const int B = static_cast<int>(ball.size());
  for (int i = 0; i < B; ++i) {
    Rational gap = abs(trace(phi.values[static_cast<std::size_t>(i)]) -
                       trace(ball.elements()[static_cast<std::size_t>(i)].value));
    if (gap > report.trace_defect) {
      report.trace_defect = gap;
      report.worst_trace_element = i;
    }
  }
  for (const auto& [i, j, k] : product_table(ball)) {
    Rational gap = distance(compose(phi.values[static_cast<std::size_t>(i)],
                                    phi.values[static_cast<std::size_t>(j)]),
                            phi.values[static_cast<std::size_t>(k)]);
    if (gap > report.mult_defect) {
      report.mult_defect = gap;
      report.worst_pair = std::make_tuple(i, j, k);
    }
  }
  return report;
}

namespace {

long long_of(const BigInt& n, const char* what) {
  if (!n.fits_slong_p()) throw ValidationError(std::string(what) + " does not fit a machine word");
  return n.get_si();
}

// Ball structure reduced to plain integers so the counting loops run on
// int8 arrays with no allocation or rational arithmetic per candidate.
struct FlatBall {
  int B = 0;
  int L = 0;
  int d = 0;
  int k = 0;                       // generator count
  std::vector<std::string> gen_names;  // sorted (map order)
  std::vector<int> letter_kind;    // 0 identity, 1 generator, 2 inverse
  std::vector<int> letter_gen;     // ordinal into gen_names, or -1
  std::vector<std::vector<int>> word_letters;
  std::vector<std::vector<int>> element_words;
  std::vector<long> tnum, tden;    // source trace of each element
  std::vector<std::array<int, 3>> pairs;  // (left, right, product)
  std::vector<int> gen_elements;   // ball element index per generator ordinal
};

FlatBall flatten(const GeneratorSet& F, const SigmaBall& ball, int d) {
  FlatBall fb;
  fb.B = static_cast<int>(ball.size());
  fb.L = static_cast<int>(ball.letters().size());
  fb.d = d;
  for (const auto& [name, value] : F.generators()) {
    (void)value;
    fb.gen_names.push_back(name);
  }
  fb.k = static_cast<int>(fb.gen_names.size());
  for (const auto& letter : ball.letters()) {
    int kind = letter.kind == GeneratorSet::Letter::Kind::identity    ? 0
               : letter.kind == GeneratorSet::Letter::Kind::generator ? 1
                                                                      : 2;
    fb.letter_kind.push_back(kind);
    int gen = -1;
    if (kind != 0) {
      auto it = std::lower_bound(fb.gen_names.begin(), fb.gen_names.end(), letter.name);
      gen = static_cast<int>(it - fb.gen_names.begin());
    }
    fb.letter_gen.push_back(gen);
  }
  for (const auto& w : ball.words()) fb.word_letters.push_back(w.letters);
  for (const auto& e : ball.elements()) {
    fb.element_words.push_back(e.words);
    Rational t = trace(e.value);
    fb.tnum.push_back(long_of(t.get_num(), "trace numerator"));
    fb.tden.push_back(long_of(t.get_den(), "trace denominator"));
  }
  for (const auto& [i, j, k] : product_table(ball)) fb.pairs.push_back({i, j, k});
  for (const auto& name : fb.gen_names) {
    auto idx = ball.index_of(F.generators().at(name));
    if (!idx) throw ValidationError("generator value missing from its own ball");
    fb.gen_elements.push_back(*idx);
  }
  return fb;
}

// Exact membership of the anchor subsemigroup, in flat form.
struct FlatAnchor {
  std::vector<int> idx;                    // ball element indices of the anchor
  std::vector<std::array<int, 3>> prods;   // products within the anchor
};

// Evaluates one generator assignment: extends it over the ball along
// provenance and applies the defect thresholds, all in int8 arrays. The
// threshold arithmetic cross-multiplies exact integers; no floating point.
struct FlatEvaluator {
  const FlatBall& fb;
  long dnum, dden;
  int mlimit;  // smallest disagreement count that fails a pair check
  std::vector<std::int8_t> letters, words, elems, tmp;
  std::vector<std::int8_t> dom_count, ran_count;

  FlatEvaluator(const FlatBall& flat, const Rational& delta) : fb(flat) {
    Rational dl = delta;
    dl.canonicalize();
    if (sgn(dl) < 0) throw ValidationError("defect threshold must be nonnegative");
    dnum = long_of(dl.get_num(), "threshold numerator");
    dden = long_of(dl.get_den(), "threshold denominator");
    if (dnum == 0) {
      mlimit = 1;
    } else {
      // A pair fails when disagreements m satisfy m/d >= delta and m > 0.
      const long need = (dnum * fb.d + dden - 1) / dden;
      mlimit = static_cast<int>(std::max(1l, std::min(need, static_cast<long>(fb.d) + 1)));
    }
    const std::size_t n = static_cast<std::size_t>(fb.d);
    letters.resize(static_cast<std::size_t>(fb.L) * n);
    words.resize(fb.word_letters.size() * n);
    elems.resize(static_cast<std::size_t>(fb.B) * n);
    tmp.resize(n);
    dom_count.resize(n);
    ran_count.resize(n);
  }

  // gen_vals[g] points at d bytes: the mapping of generator g's value.
  bool evaluate(const std::int8_t* const* gen_vals) {
    const int d = fb.d;
    for (int l = 0; l < fb.L; ++l) {
      std::int8_t* out = &letters[static_cast<std::size_t>(l) * static_cast<std::size_t>(d)];
      if (fb.letter_kind[static_cast<std::size_t>(l)] == 0) {
        for (int x = 0; x < d; ++x) out[x] = static_cast<std::int8_t>(x);
      } else if (fb.letter_kind[static_cast<std::size_t>(l)] == 1) {
        std::memcpy(out, gen_vals[fb.letter_gen[static_cast<std::size_t>(l)]],
                    static_cast<std::size_t>(d));
      } else {
        const std::int8_t* src = gen_vals[fb.letter_gen[static_cast<std::size_t>(l)]];
        std::memset(out, 0xff, static_cast<std::size_t>(d));
        for (int x = 0; x < d; ++x)
          if (src[x] >= 0) out[src[x]] = static_cast<std::int8_t>(x);
      }
    }
    for (std::size_t w = 0; w < fb.word_letters.size(); ++w) {
      const auto& ls = fb.word_letters[w];
      std::int8_t* out = &words[w * static_cast<std::size_t>(d)];
      std::memcpy(out, &letters[static_cast<std::size_t>(ls.front()) * static_cast<std::size_t>(d)],
                  static_cast<std::size_t>(d));
      for (std::size_t i = 1; i < ls.size(); ++i) {
        const std::int8_t* right =
            &letters[static_cast<std::size_t>(ls[i]) * static_cast<std::size_t>(d)];
        // acc' = acc after right: acc'(x) = acc(right(x)).
        for (int x = 0; x < d; ++x) {
          const std::int8_t y = right[x];
          tmp[static_cast<std::size_t>(x)] = y >= 0 ? out[y] : static_cast<std::int8_t>(-1);
        }
        std::memcpy(out, tmp.data(), static_cast<std::size_t>(d));
      }
    }
    for (int e = 0; e < fb.B; ++e) {
      std::int8_t* out = &elems[static_cast<std::size_t>(e) * static_cast<std::size_t>(d)];
      const auto& ws = fb.element_words[static_cast<std::size_t>(e)];
      if (ws.empty()) {
        std::memset(out, 0xff, static_cast<std::size_t>(d));
      } else if (ws.size() == 1) {
        std::memcpy(out, &words[static_cast<std::size_t>(ws.front()) * static_cast<std::size_t>(d)],
                    static_cast<std::size_t>(d));
      } else {
        std::memset(dom_count.data(), 0, static_cast<std::size_t>(d));
        std::memset(ran_count.data(), 0, static_cast<std::size_t>(d));
        for (int w : ws) {
          const std::int8_t* part =
              &words[static_cast<std::size_t>(w) * static_cast<std::size_t>(d)];
          for (int x = 0; x < d; ++x)
            if (part[x] >= 0) {
              ++dom_count[static_cast<std::size_t>(x)];
              ++ran_count[static_cast<std::size_t>(part[x])];
            }
        }
        std::memset(out, 0xff, static_cast<std::size_t>(d));
        for (int w : ws) {
          const std::int8_t* part =
              &words[static_cast<std::size_t>(w) * static_cast<std::size_t>(d)];
          for (int x = 0; x < d; ++x) {
            const std::int8_t y = part[x];
            if (y >= 0 && dom_count[static_cast<std::size_t>(x)] == 1 &&
                ran_count[static_cast<std::size_t>(y)] == 1)
              out[x] = y;
          }
        }
      }
      long fp = 0;
      for (int x = 0; x < d; ++x)
        if (out[x] == x) ++fp;
      // |fp/d - tnum/tden| < delta, or exactly zero.
      const long tn = fb.tnum[static_cast<std::size_t>(e)];
      const long td = fb.tden[static_cast<std::size_t>(e)];
      const long gap = std::labs(fp * td - tn * d);
      if (gap != 0 &&
          static_cast<__int128>(gap) * dden >=
              static_cast<__int128>(dnum) * d * td)
        return false;
    }
    const int d_ = d;
    for (const auto& p : fb.pairs) {
      const std::int8_t* a = &elems[static_cast<std::size_t>(p[0]) * static_cast<std::size_t>(d_)];
      const std::int8_t* b = &elems[static_cast<std::size_t>(p[1]) * static_cast<std::size_t>(d_)];
      const std::int8_t* c = &elems[static_cast<std::size_t>(p[2]) * static_cast<std::size_t>(d_)];
      int m = 0;
      for (int x = 0; x < d_; ++x) {
        const std::int8_t y = b[x];
        const std::int8_t v = y >= 0 ? a[y] : static_cast<std::int8_t>(-1);
        if (v != c[x] && (v >= 0 || c[x] >= 0)) {
          if (++m >= mlimit) return false;
        }
      }
    }
    return true;
  }

  // Exact checks on the anchor: traces on the nose, injective, multiplicative.
  bool anchor_holds(const FlatAnchor& anchor) {
    const int d = fb.d;
    for (int e : anchor.idx) {
      const std::int8_t* v = &elems[static_cast<std::size_t>(e) * static_cast<std::size_t>(d)];
      long fp = 0;
      for (int x = 0; x < d; ++x)
        if (v[x] == x) ++fp;
      if (fp * fb.tden[static_cast<std::size_t>(e)] != fb.tnum[static_cast<std::size_t>(e)] * d)
        return false;
    }
    for (std::size_t i = 0; i < anchor.idx.size(); ++i)
      for (std::size_t j = i + 1; j < anchor.idx.size(); ++j)
        if (std::memcmp(&elems[static_cast<std::size_t>(anchor.idx[i]) * static_cast<std::size_t>(d)],
                        &elems[static_cast<std::size_t>(anchor.idx[j]) * static_cast<std::size_t>(d)],
                        static_cast<std::size_t>(d)) == 0)
          return false;
    for (const auto& p : anchor.prods) {
      const std::int8_t* a = &elems[static_cast<std::size_t>(p[0]) * static_cast<std::size_t>(d)];
      const std::int8_t* b = &elems[static_cast<std::size_t>(p[1]) * static_cast<std::size_t>(d)];
      const std::int8_t* c = &elems[static_cast<std::size_t>(p[2]) * static_cast<std::size_t>(d)];
      for (int x = 0; x < d; ++x) {
        const std::int8_t y = b[x];
        const std::int8_t v = y >= 0 ? a[y] : static_cast<std::int8_t>(-1);
        if (v != c[x]) return false;
      }
    }
    return true;
  }
};

using ByteTuple = std::vector<std::int8_t>;

std::uint64_t restriction_hash_of(const Restriction& r) {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& pb : r) h = mix64(h ^ pb.hash());
  return h;
}

// Decode the deduplicated byte tuples into the report: count, summed hash,
// and (on request) the restriction list in ascending byte order.
void finalize_from_set(CountReport& report, const std::set<ByteTuple>& tuples,
                       const CarrierPtr& target, int k, bool collect) {
  const int d = target->size();
  report.count = BigInt(static_cast<unsigned long>(tuples.size()));
  report.restriction_hash = 0;
  for (const auto& bytes : tuples) {
    Restriction r;
    r.reserve(static_cast<std::size_t>(k));
    for (int g = 0; g < k; ++g) {
      std::vector<std::int32_t> map(static_cast<std::size_t>(d));
      for (int x = 0; x < d; ++x)
        map[static_cast<std::size_t>(x)] =
            bytes[static_cast<std::size_t>(g) * static_cast<std::size_t>(d) +
                  static_cast<std::size_t>(x)];
      r.emplace_back(target, std::move(map));
    }
    report.restriction_hash += restriction_hash_of(r);
    if (collect) report.restrictions.push_back(std::move(r));
  }
  report.ratio = growth_ratio(report.count, report.d);
}

ByteTuple restriction_bytes(const FlatEvaluator& ev) {
  const int d = ev.fb.d;
  ByteTuple bytes;
  bytes.reserve(static_cast<std::size_t>(ev.fb.k) * static_cast<std::size_t>(d));
  for (int g = 0; g < ev.fb.k; ++g) {
    const std::int8_t* v =
        &ev.elems[static_cast<std::size_t>(ev.fb.gen_elements[static_cast<std::size_t>(g)]) *
                  static_cast<std::size_t>(d)];
    bytes.insert(bytes.end(), v, v + d);
  }
  return bytes;
}

// Exhaustive scan over all generator assignments; the candidate order fixes
// the first generator slowest. Workers split the first generator's range and
// merge their deduplicated restriction sets, so results cannot depend on the
// worker count.
std::set<ByteTuple> exhaustive_scan(const FlatBall& fb, const std::vector<std::int8_t>& flat,
                                    long M, const Rational& delta, const FlatAnchor* anchor,
                                    int workers) {
  const int k = fb.k;
  const int d = fb.d;
  if (k == 0) {
    FlatEvaluator ev(fb, delta);
    std::set<ByteTuple> out;
    if (ev.evaluate(nullptr) && (!anchor || ev.anchor_holds(*anchor))) out.insert({});
    return out;
  }
  long rest_count = 1;
  for (int g = 1; g < k; ++g) {
    if (rest_count > std::numeric_limits<long>::max() / M)
      throw CapExceeded("assignment space does not fit a machine word");
    rest_count *= M;
  }
  auto scan = [&](long lo, long hi, std::set<ByteTuple>& out) {
    FlatEvaluator ev(fb, delta);
    std::vector<const std::int8_t*> ptrs(static_cast<std::size_t>(k));
    for (long first = lo; first < hi; ++first) {
      ptrs[0] = &flat[static_cast<std::size_t>(first) * static_cast<std::size_t>(d)];
      for (long rest = 0; rest < rest_count; ++rest) {
        long r = rest;
        for (int g = k - 1; g >= 1; --g) {
          ptrs[static_cast<std::size_t>(g)] =
              &flat[static_cast<std::size_t>(r % M) * static_cast<std::size_t>(d)];
          r /= M;
        }
        if (!ev.evaluate(ptrs.data())) continue;
        if (anchor && !ev.anchor_holds(*anchor)) continue;
        out.insert(restriction_bytes(ev));
      }
    }
  };
  const int W = static_cast<int>(std::max(1l, std::min(static_cast<long>(workers), M)));
  std::vector<std::set<ByteTuple>> partial(static_cast<std::size_t>(W));
  if (W == 1) {
    scan(0, M, partial[0]);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < W; ++w) {
      const long lo = M * w / W;
      const long hi = M * (w + 1) / W;
      threads.emplace_back([&, lo, hi, w] { scan(lo, hi, partial[static_cast<std::size_t>(w)]); });
    }
    for (auto& t : threads) t.join();
  }
  std::set<ByteTuple> merged;
  for (auto& p : partial) merged.merge(p);
  return merged;
}

std::vector<std::int8_t> flatten_elements(const std::vector<PartialBijection>& all, int d) {
  std::vector<std::int8_t> flat(all.size() * static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < all.size(); ++i)
    for (int x = 0; x < d; ++x)
      flat[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(x)] =
          static_cast<std::int8_t>(all[i].image(x));
  return flat;
}

BigInt random_below(RngStream& rng, const BigInt& n) {
  const std::size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
  const std::size_t chunks = (bits + 63) / 64;
  const unsigned top_bits = static_cast<unsigned>(bits % 64);
  while (true) {
    BigInt z = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
      std::uint64_t word = rng.next();
      if (c == 0 && top_bits != 0) word &= (~0ull) >> (64 - top_bits);
      mpz_mul_2exp(z.get_mpz_t(), z.get_mpz_t(), 64);
      mpz_add_ui(z.get_mpz_t(), z.get_mpz_t(), static_cast<unsigned long>(word));
    }
    if (z < n) return z;
  }
}

CountReport sampled_scan(const FlatBall& fb, const CarrierPtr& target, const Rational& delta,
                         const BigInt& space, const CountOptions& opts, CountReport report) {
  report.sampled = true;
  report.space_size = space;
  report.samples = opts.sample_budget;
  const int k = fb.k;
  const int d = fb.d;
  const int W = std::max(1, opts.workers);
  std::vector<long> partial_hits(static_cast<std::size_t>(W), 0);
  auto run = [&](long lo, long hi, long& hits) {
    FlatEvaluator ev(fb, delta);
    std::vector<std::int8_t> buf(static_cast<std::size_t>(k) * static_cast<std::size_t>(d));
    std::vector<const std::int8_t*> ptrs(static_cast<std::size_t>(k));
    for (int g = 0; g < k; ++g)
      ptrs[static_cast<std::size_t>(g)] = &buf[static_cast<std::size_t>(g) * static_cast<std::size_t>(d)];
    for (long s = lo; s < hi; ++s) {
      RngStream rng(opts.seed, static_cast<std::uint64_t>(s));
      for (int g = 0; g < k; ++g) {
        PartialBijection v = random_semigroup_element(target, rng);
        for (int x = 0; x < d; ++x)
          buf[static_cast<std::size_t>(g) * static_cast<std::size_t>(d) +
              static_cast<std::size_t>(x)] = static_cast<std::int8_t>(v.image(x));
      }
      if (ev.evaluate(k == 0 ? nullptr : ptrs.data())) ++hits;
    }
  };
  if (W == 1) {
    run(0, opts.sample_budget, partial_hits[0]);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < W; ++w) {
      const long lo = opts.sample_budget * static_cast<long>(w) / W;
      const long hi = opts.sample_budget * static_cast<long>(w + 1) / W;
      threads.emplace_back([&, lo, hi, w] { run(lo, hi, partial_hits[static_cast<std::size_t>(w)]); });
    }
    for (auto& t : threads) t.join();
  }
  for (long h : partial_hits) report.hits += h;
  const double nf = static_cast<double>(report.samples);
  const double p = static_cast<double>(report.hits) / nf;
  const double ln_space = log_bigint(space);
  report.estimate = report.hits > 0 ? std::exp(std::log(p) + ln_space) : 0.0;
  const double z = 1.959963984540054;
  const double denom = 1.0 + z * z / nf;
  const double center = (p + z * z / (2 * nf)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / nf + z * z / (4 * nf * nf)) / denom;
  const double lo_frac = std::max(0.0, center - half);
  const double hi_frac = std::min(1.0, center + half);
  report.ci_low = lo_frac > 0 ? std::exp(std::log(lo_frac) + ln_space) : 0.0;
  report.ci_high = hi_frac > 0 ? std::exp(std::log(hi_frac) + ln_space) : 0.0;
  report.ratio = report.hits > 0
                     ? (std::log(p) + ln_space) / (report.d * std::log(report.d))
                     : -std::numeric_limits<double>::infinity();
  return report;
}

void check_target_size(int d) {
  if (d < 1 || d > 64) throw ValidationError("target size must be between 1 and 64");
}

}  // namespace

CountReport count_canonical(const GeneratorSet& F, int n, int d, const CountOptions& opts) {
  check_target_size(d);
  const SigmaBall ball = sigma_ball(F, n, opts.ball_cap);
  const FlatBall fb = flatten(F, ball, d);
  const CarrierPtr target = Carrier::uniform(d);
  Rational delta = opts.delta;
  delta.canonicalize();
  const BigInt M = partial_bijection_count(d);
  BigInt space = 1;
  for (int g = 0; g < fb.k; ++g) space *= M;
  CountReport report;
  report.d = d;
  report.mode = CountMode::canonical;
  report.n = n;
  report.delta = delta;
  if (space > opts.psi_space_cap) {
    if (opts.sample_budget > 0) return sampled_scan(fb, target, delta, space, opts, report);
    throw CapExceeded("assignment space has " + bigint_to_string(space) +
                      " points, cap is " + bigint_to_string(opts.psi_space_cap));
  }
  std::vector<PartialBijection> all;
  std::vector<std::int8_t> flat;
  if (fb.k > 0) {
    all = enumerate_all(target, std::numeric_limits<std::uint64_t>::max());
    flat = flatten_elements(all, d);
  }
  const auto tuples = exhaustive_scan(fb, flat, static_cast<long>(all.size()), delta,
                                      nullptr, opts.workers);
  finalize_from_set(report, tuples, target, fb.k, opts.collect_restrictions);
  return report;
}

ExactCount count_exact(const GeneratorSet& F, int n, int d, const CountOptions& opts,
                       bool collect_assignments) {
  check_target_size(d);
  const SigmaBall ball = sigma_ball(F, n, opts.ball_cap);
  const CarrierPtr target = Carrier::uniform(d);
  const BigInt M = partial_bijection_count(d);
  if (BigInt(static_cast<unsigned long>(ball.size())) * M >
      BigInt(static_cast<unsigned long>(opts.exact_cap)))
    throw CapExceeded("existential search needs ball size x semigroup size <= " +
                      std::to_string(opts.exact_cap));
  Rational delta = opts.delta;
  delta.canonicalize();
  if (sgn(delta) < 0) throw ValidationError("defect threshold must be nonnegative");
  const bool exact_mode = sgn(delta) == 0;
  const std::vector<PartialBijection> all =
      enumerate_all(target, std::numeric_limits<std::uint64_t>::max());
  const int B = static_cast<int>(ball.size());

  std::vector<Rational> tau;
  tau.reserve(static_cast<std::size_t>(B));
  for (const auto& e : ball.elements()) tau.push_back(trace(e.value));
  const auto table = product_table(ball);
  std::vector<std::vector<std::array<int, 3>>> touching(static_cast<std::size_t>(B));
  std::vector<std::vector<std::array<int, 2>>> producing(static_cast<std::size_t>(B));
  for (const auto& [i, j, k] : table) {
    std::array<int, 3> p{i, j, k};
    touching[static_cast<std::size_t>(i)].push_back(p);
    if (j != i) touching[static_cast<std::size_t>(j)].push_back(p);
    if (k != i && k != j) touching[static_cast<std::size_t>(k)].push_back(p);
    producing[static_cast<std::size_t>(k)].push_back({i, j});
  }

  // Search order: identity first, then the zero element, then the generator
  // elements in name order, then everything else; constrained values come
  // early so pruning bites.
  std::vector<int> order;
  std::vector<char> queued(static_cast<std::size_t>(B), 0);
  auto enqueue = [&](int e) {
    if (!queued[static_cast<std::size_t>(e)]) {
      queued[static_cast<std::size_t>(e)] = 1;
      order.push_back(e);
    }
  };
  enqueue(ball.one_index());
  enqueue(ball.zero_index());
  std::vector<int> gen_elements;
  for (const auto& [name, value] : F.generators()) {
    auto idx = ball.index_of(value);
    if (!idx) throw ValidationError("generator '" + name + "' missing from its own ball");
    gen_elements.push_back(*idx);
    enqueue(*idx);
  }
  for (int e = 0; e < B; ++e) enqueue(e);

  std::vector<int> assigned(static_cast<std::size_t>(B), -1);  // index into `all`
  std::set<ByteTuple> tuples;
  std::vector<MicrostateAssignment> assignments;

  auto consistent = [&](int e) {
    const PartialBijection& v = all[static_cast<std::size_t>(assigned[static_cast<std::size_t>(e)])];
    if (!passes_threshold(abs(trace(v) - tau[static_cast<std::size_t>(e)]), delta)) return false;
    for (const auto& p : touching[static_cast<std::size_t>(e)]) {
      const int ai = assigned[static_cast<std::size_t>(p[0])];
      const int aj = assigned[static_cast<std::size_t>(p[1])];
      const int ak = assigned[static_cast<std::size_t>(p[2])];
      if (ai < 0 || aj < 0 || ak < 0) continue;
      if (!passes_threshold(distance(compose(all[static_cast<std::size_t>(ai)],
                                             all[static_cast<std::size_t>(aj)]),
                                     all[static_cast<std::size_t>(ak)]),
                            delta))
        return false;
    }
    return true;
  };

  auto record_leaf = [&]() {
    ByteTuple bytes;
    bytes.reserve(gen_elements.size() * static_cast<std::size_t>(d));
    for (int e : gen_elements) {
      const PartialBijection& v = all[static_cast<std::size_t>(assigned[static_cast<std::size_t>(e)])];
      for (int x = 0; x < d; ++x) bytes.push_back(static_cast<std::int8_t>(v.image(x)));
    }
    tuples.insert(std::move(bytes));
    if (collect_assignments) {
      MicrostateAssignment phi{target, {}};
      for (int e = 0; e < B; ++e)
        phi.values.push_back(all[static_cast<std::size_t>(assigned[static_cast<std::size_t>(e)])]);
      assignments.push_back(std::move(phi));
    }
  };

  const PartialBijection identity = PartialBijection::identity(target);
  auto index_in_all = [&](const PartialBijection& v) {
    // enumerate_all emits in a canonical order; find by scan (tiny instances).
    for (std::size_t i = 0; i < all.size(); ++i)
      if (all[i] == v) return static_cast<int>(i);
    return -1;
  };
  const int identity_index = index_in_all(identity);

  std::function<void(std::size_t)> dfs = [&](std::size_t level) {
    if (level == order.size()) {
      record_leaf();
      return;
    }
    const int e = order[level];
    if (e == ball.one_index()) {
      assigned[static_cast<std::size_t>(e)] = identity_index;
      if (consistent(e)) dfs(level + 1);
      assigned[static_cast<std::size_t>(e)] = -1;
      return;
    }
    if (exact_mode) {
      // Any fully assigned factor pair forces this value exactly.
      for (const auto& p : producing[static_cast<std::size_t>(e)]) {
        const int ai = assigned[static_cast<std::size_t>(p[0])];
        const int aj = assigned[static_cast<std::size_t>(p[1])];
        if (ai < 0 || aj < 0) continue;
        const int forced = index_in_all(
            compose(all[static_cast<std::size_t>(ai)], all[static_cast<std::size_t>(aj)]));
        assigned[static_cast<std::size_t>(e)] = forced;
        if (consistent(e)) dfs(level + 1);
        assigned[static_cast<std::size_t>(e)] = -1;
        return;
      }
    }
    for (std::size_t i = 0; i < all.size(); ++i) {
      assigned[static_cast<std::size_t>(e)] = static_cast<int>(i);
      if (consistent(e)) dfs(level + 1);
    }
    assigned[static_cast<std::size_t>(e)] = -1;
  };
  dfs(0);

  ExactCount result;
  result.report.d = d;
  result.report.mode = CountMode::exact;
  result.report.n = n;
  result.report.delta = delta;
  finalize_from_set(result.report, tuples, target, static_cast<int>(gen_elements.size()),
                    opts.collect_restrictions);
  result.assignments = std::move(assignments);
  return result;
}

CountReport count_anchored(const GeneratorSet& F, int n, int d,
                           const std::vector<PartialBijection>& anchor,
                           const CountOptions& opts) {
  check_target_size(d);
  const SigmaBall ball = sigma_ball(F, n, opts.ball_cap);
  const FlatBall fb = flatten(F, ball, d);
  const CarrierPtr target = Carrier::uniform(d);

  FlatAnchor fa;
  for (const auto& v : anchor) {
    require_same_carrier(v.carrier(), F.carrier(), "count_anchored");
    auto idx = ball.index_of(v);
    if (!idx) throw ValidationError("anchor element " + v.to_string() + " is not in the ball");
    fa.idx.push_back(*idx);
  }
  std::sort(fa.idx.begin(), fa.idx.end());
  if (std::adjacent_find(fa.idx.begin(), fa.idx.end()) != fa.idx.end())
    throw ValidationError("anchor elements must be distinct");
  auto anchor_pos = [&](const PartialBijection& v) -> int {
    auto idx = ball.index_of(v);
    if (!idx) return -1;
    auto it = std::lower_bound(fa.idx.begin(), fa.idx.end(), *idx);
    if (it == fa.idx.end() || *it != *idx) return -1;
    return *idx;
  };
  for (int i : fa.idx) {
    const PartialBijection& vi = ball.elements()[static_cast<std::size_t>(i)].value;
    if (anchor_pos(vi.inverse()) < 0)
      throw ValidationError("anchor is not closed under inverse");
    for (int j : fa.idx) {
      const PartialBijection& vj = ball.elements()[static_cast<std::size_t>(j)].value;
      const int k = anchor_pos(compose(vi, vj));
      if (k < 0) throw ValidationError("anchor is not closed under composition");
      fa.prods.push_back({i, j, k});
    }
  }

  // An exact unital trace-preserving embedding gives every minimal projection
  // an integer number of target points; otherwise no d works unless it is a
  // multiple of every trace denominator.
  BigInt divisor = 1;
  bool violated = false;
  for (std::size_t a = 0; a < fa.idx.size(); ++a) {
    const PartialBijection& p = ball.elements()[static_cast<std::size_t>(fa.idx[a])].value;
    if (!p.is_projection() || p.is_zero()) continue;
    bool minimal = true;
    for (std::size_t b = 0; b < fa.idx.size() && minimal; ++b) {
      if (b == a) continue;
      const PartialBijection& q = ball.elements()[static_cast<std::size_t>(fa.idx[b])].value;
      if (q.is_projection() && !q.is_zero() && q != p && q.restriction_of(p)) minimal = false;
    }
    if (!minimal) continue;
    Rational t = trace(p);
    mpz_lcm(divisor.get_mpz_t(), divisor.get_mpz_t(), t.get_den().get_mpz_t());
    Rational share = t * d;
    if (share.get_den() != 1) violated = true;
  }
  if (violated)
    throw DivisibilityError(
        "no unital trace-preserving embedding exists on " + std::to_string(d) +
            " points; the target size must be a multiple of " + bigint_to_string(divisor),
        long_of(divisor, "required divisor"));

  const BigInt M = partial_bijection_count(d);
  BigInt space = 1;
  for (int g = 0; g < fb.k; ++g) space *= M;
  if (space > opts.psi_space_cap)
    throw CapExceeded("assignment space has " + bigint_to_string(space) +
                      " points, cap is " + bigint_to_string(opts.psi_space_cap));
  CountReport report;
  report.d = d;
  report.mode = CountMode::anchored;
  report.n = n;
  report.delta = opts.delta;
  report.delta.canonicalize();
  std::vector<PartialBijection> all;
  std::vector<std::int8_t> flat;
  if (fb.k > 0) {
    all = enumerate_all(target, std::numeric_limits<std::uint64_t>::max());
    flat = flatten_elements(all, d);
  }
  const auto tuples = exhaustive_scan(fb, flat, static_cast<long>(all.size()), report.delta,
                                      &fa, opts.workers);
  finalize_from_set(report, tuples, target, fb.k, opts.collect_restrictions);
  return report;
}

Rational restriction_distance(const Restriction& a, const Restriction& b) {
  if (a.size() != b.size())
    throw ValidationError("restrictions have different generator counts");
  Rational best = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    Rational g = distance(a[i], b[i]);
    if (g > best) best = g;
  }
  return best;
}

namespace {

long greedy_cover(const std::vector<std::vector<std::uint64_t>>& balls, int n) {
  const std::size_t blocks = balls.empty() ? 0 : balls.front().size();
  std::vector<std::uint64_t> uncovered(blocks, 0);
  for (int i = 0; i < n; ++i)
    uncovered[static_cast<std::size_t>(i) / 64] |= 1ull << (static_cast<std::size_t>(i) % 64);
  long used = 0;
  while (true) {
    bool any = false;
    for (const auto& b : uncovered)
      if (b) {
        any = true;
        break;
      }
    if (!any) return used;
    int best = 0;
    int best_gain = -1;
    for (int i = 0; i < n; ++i) {
      int gain = 0;
      for (std::size_t bl = 0; bl < blocks; ++bl)
        gain += __builtin_popcountll(balls[static_cast<std::size_t>(i)][bl] & uncovered[bl]);
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    for (std::size_t bl = 0; bl < blocks; ++bl)
      uncovered[bl] &= ~balls[static_cast<std::size_t>(best)][bl];
    ++used;
  }
}

}  // namespace

CoveringResult covering_number(const std::vector<Restriction>& restrictions,
                               const Rational& radius) {
  const int n = static_cast<int>(restrictions.size());
  if (n == 0) return {0, true};
  if (n > 5000) throw CapExceeded("covering supports at most 5000 restrictions");
  const std::size_t blocks = (static_cast<std::size_t>(n) + 63) / 64;
  std::vector<std::vector<std::uint64_t>> balls(
      static_cast<std::size_t>(n), std::vector<std::uint64_t>(blocks, 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Rational dist = restriction_distance(restrictions[static_cast<std::size_t>(i)],
                                                 restrictions[static_cast<std::size_t>(j)]);
      if (dist < radius || sgn(dist) == 0)
        balls[static_cast<std::size_t>(i)][static_cast<std::size_t>(j) / 64] |=
            1ull << (static_cast<std::size_t>(j) % 64);
    }
  if (n > 20) return {greedy_cover(balls, n), false};
  // Exact minimal set cover by branch and bound over a single-word bitmask.
  const std::uint32_t full = n == 32 ? ~0u : ((1u << n) - 1);
  std::vector<std::uint32_t> mask(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) mask[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(balls[static_cast<std::size_t>(i)][0]);
  long best = greedy_cover(balls, n);
  std::function<void(std::uint32_t, long)> rec = [&](std::uint32_t covered, long used) {
    if (covered == full) {
      best = std::min(best, used);
      return;
    }
    if (used + 1 >= best) return;
    const int e = __builtin_ctz(~covered & full);
    for (int i = 0; i < n; ++i)
      if (mask[static_cast<std::size_t>(i)] & (1u << e)) rec(covered | mask[static_cast<std::size_t>(i)], used + 1);
  };
  rec(0, 0);
  return {best, true};
}

void fill_covering(CountReport& report, const std::vector<Rational>& radii) {
  if (BigInt(static_cast<unsigned long>(report.restrictions.size())) != report.count)
    throw ValidationError("covering numbers need the collected restriction set");
  for (const auto& r : radii)
    report.covering.emplace_back(r, covering_number(report.restrictions, r));
}

GrowthReport growth_report(const std::vector<std::pair<int, BigInt>>& counts) {
  GrowthReport g;
  for (const auto& [d, c] : counts) {
    if (d < 2) throw ValidationError("growth ratios need target size at least 2");
    g.rows.push_back({d, c, growth_ratio(c, d)});
  }
  bool up = false, down = false;
  for (std::size_t i = 1; i < g.rows.size(); ++i) {
    if (g.rows[i].ratio > g.rows[i - 1].ratio) up = true;
    if (g.rows[i].ratio < g.rows[i - 1].ratio) down = true;
  }
  g.trend = (!up && !down) ? "constant"
            : up && !down  ? "nondecreasing"
            : !up && down  ? "nonincreasing"
                           : "mixed";
  return g;
}

PartialBijection random_semigroup_element(const CarrierPtr& carrier, RngStream& rng) {
  const int d = carrier->size();
  std::vector<BigInt> cumulative;
  BigInt total = 0;
  for (int j = 0; j <= d; ++j) {
    const BigInt b = binomial(static_cast<unsigned long>(d), static_cast<unsigned long>(j));
    total += b * b * factorial(static_cast<unsigned long>(j));
    cumulative.push_back(total);
  }
  const BigInt pick = random_below(rng, total);
  int j = 0;
  while (cumulative[static_cast<std::size_t>(j)] <= pick) ++j;
  std::vector<int> dom(static_cast<std::size_t>(d));
  std::vector<int> ran(static_cast<std::size_t>(d));
  for (int x = 0; x < d; ++x) {
    dom[static_cast<std::size_t>(x)] = x;
    ran[static_cast<std::size_t>(x)] = x;
  }
  rng.shuffle(dom);
  rng.shuffle(ran);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < j; ++i)
    pairs.emplace_back(dom[static_cast<std::size_t>(i)], ran[static_cast<std::size_t>(i)]);
  return PartialBijection::from_pairs(carrier, pairs);
}

}  // namespace soficlab
