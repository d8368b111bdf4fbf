#include "soficlab/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "soficlab/closedform.hpp"
#include "soficlab/errors.hpp"
#include "soficlab/freeprod.hpp"
#include "soficlab/microstates.hpp"
#include "soficlab/presentation.hpp"

namespace soficlab {
namespace {

// ---------------------------------------------------------------------------
// Small parsing helpers.

// "2,4,6", "2..8" or "2..8:2" -> a list of sizes.
std::vector<int> parse_d_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    if (piece.empty()) throw ValidationError("empty entry in --d list '" + text + "'");
    const auto dots = piece.find("..");
    if (dots == std::string::npos) {
      out.push_back(std::stoi(piece));
      continue;
    }
    const int lo = std::stoi(piece.substr(0, dots));
    std::string rest = piece.substr(dots + 2);
    int step = 1;
    if (const auto colon = rest.find(':'); colon != std::string::npos) {
      step = std::stoi(rest.substr(colon + 1));
      rest = rest.substr(0, colon);
    }
    const int hi = std::stoi(rest);
    if (step <= 0) throw ValidationError("nonpositive step in --d range '" + piece + "'");
    for (int d = lo; d <= hi; d += step) out.push_back(d);
  }
  if (out.empty()) throw ValidationError("--d resolved to an empty list");
  for (int d : out)
    if (d < 1) throw ValidationError("sizes in --d must be positive");
  return out;
}

std::vector<Rational> parse_rational_list(const std::string& text) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) out.push_back(parse_rational(piece));
  if (out.empty()) throw ValidationError("empty rational list '" + text + "'");
  return out;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    if (!piece.empty()) out.push_back(piece);
  }
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Report assembly: header comments plus a column table, rendered as
// tab-separated values or as structured records.

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> footers;  // extra comment lines after the table
};

std::string render(const Table& t, const RunConfig& cfg, const std::string& config_echo) {
  std::string out = "# soficlab " + cfg.command + "\n";
  out += "# config: " + config_echo + "\n";
  if (!cfg.no_timestamp) {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out += std::string("# generated: ") + buf + "\n";
  }
  if (cfg.format == "records") {
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      out += "[record " + std::to_string(r + 1) + "]\n";
      for (std::size_t c = 0; c < t.columns.size(); ++c)
        out += t.columns[c] + " = " + t.rows[r][c] + "\n";
      out += "\n";
    }
  } else {
    for (std::size_t c = 0; c < t.columns.size(); ++c)
      out += (c ? "\t" : "") + t.columns[c];
    out += "\n";
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "\t" : "") + row[c];
      out += "\n";
    }
  }
  for (const auto& f : t.footers) out += "# " + f + "\n";
  return out;
}

std::string echo_config(const RunConfig& cfg) {
  std::string s;
  s += "command=" + cfg.command;
  s += " presentation=" + (cfg.presentation.empty() ? "-" : cfg.presentation);
  s += " d=" + join_ints(cfg.d_list);
  s += " n=" + std::to_string(cfg.n);
  s += " delta=" + rational_to_string(parse_rational(cfg.delta));
  s += " mode=" + cfg.mode;
  s += " epsilon=" + cfg.epsilon;
  s += " samples=" + std::to_string(cfg.samples);
  s += " seed=" + std::to_string(cfg.seed);
  s += " constant=" + rational_to_string(parse_rational(cfg.constant));
  s += " pairs=" + std::to_string(cfg.pairs);
  s += " left=" + (cfg.left.empty() ? "-" : cfg.left);
  s += " right=" + (cfg.right.empty() ? "-" : cfg.right);
  s += " psi_space_cap=" + std::to_string(cfg.psi_space_cap);
  s += " ball_cap=" + std::to_string(cfg.ball_cap);
  s += " exact_cap=" + std::to_string(cfg.exact_cap);
  s += " sample_budget=" + std::to_string(cfg.sample_budget);
  s += " workers=" + std::to_string(cfg.workers);
  s += " format=" + cfg.format;
  s += " output=" + cfg.output;
  return s;
}

CountOptions make_options(const RunConfig& cfg) {
  CountOptions opts;
  opts.delta = parse_rational(cfg.delta);
  if (sgn(opts.delta) < 0) throw ValidationError("--delta must be nonnegative");
  opts.psi_space_cap = BigInt(cfg.psi_space_cap);
  opts.ball_cap = static_cast<std::size_t>(cfg.ball_cap);
  opts.exact_cap = static_cast<std::size_t>(cfg.exact_cap);
  opts.sample_budget = cfg.sample_budget;
  opts.workers = cfg.workers;
  opts.seed = cfg.seed;
  return opts;
}

// Least d' such that every class share d*weight is an integer.
long weight_divisor(const FinRelation& R) {
  BigInt l = 1;
  for (int x = 0; x < R.size(); ++x)
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), R.carrier()->weight(x).get_den_mpz_t());
  return l.get_si();
}

// The fixed-point-free cycle 0 -> 1 -> ... -> d-1 -> 0.
PartialBijection full_cycle(const CarrierPtr& c) {
  std::vector<std::int32_t> map(static_cast<std::size_t>(c->size()));
  for (int x = 0; x < c->size(); ++x) map[static_cast<std::size_t>(x)] = (x + 1) % c->size();
  return PartialBijection(c, std::move(map));
}

// ---------------------------------------------------------------------------
// Subcommands. Each returns the table; fatal problems throw.

Table cmd_check(const RunConfig& cfg) {
  const Presentation p = load_presentation(cfg.presentation);
  Rational total = 0;
  total = 0; for (const auto& w : p.relation.carrier()->weights()) total += w;
  Table t;
  t.columns = {"points", "classes", "generators", "total_weight", "dynamically_generating"};
  t.rows.push_back({std::to_string(p.relation.size()),
                    std::to_string(p.relation.classes().size()),
                    std::to_string(p.generators.size()), rational_to_string(total),
                    is_dynamical_generating(p.generators, p.relation) ? "true" : "false"});
  return t;
}

Table cmd_count(const RunConfig& cfg) {
  const Presentation p = load_presentation(cfg.presentation);
  const CountOptions opts = make_options(cfg);
  const Rational predicted = predicted_dimension(p.relation);
  const long divisor = weight_divisor(p.relation);
  Table t;
  t.columns = {"d",     "n",     "delta", "mode",
               "count", "ratio", "predicted_dimension", "embeddings_total",
               "embeddings_centralizer", "error"};
  for (int d : cfg.d_list) {
    std::vector<std::string> row(t.columns.size(), "-");
    row[0] = std::to_string(d);
    row[1] = std::to_string(cfg.n);
    row[2] = rational_to_string(opts.delta);
    row[3] = cfg.mode;
    row[6] = rational_to_string(predicted);
    std::string error;
    if (sgn(opts.delta) == 0 && d % divisor != 0)
      error = "divisibility: no exact embedding, weights need d divisible by " +
              std::to_string(divisor);
    try {
      const CountReport rep = cfg.mode == "existential"
                                  ? count_exact(p.generators, cfg.n, d, opts).report
                                  : count_canonical(p.generators, cfg.n, d, opts);
      const EmbeddingCensus census = count_embeddings(p.relation, d);
      row[4] = bigint_to_string(rep.count);
      row[5] = fmt_double(rep.ratio);
      row[7] = bigint_to_string(census.total_embeddings);
      row[8] = bigint_to_string(census.centralizer_order);
    } catch (const DivisibilityError& e) {
      error = e.what();
    } catch (const CapExceeded& e) {
      error = e.what();
    }
    row[9] = error.empty() ? "-" : error;
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table cmd_cover(const RunConfig& cfg) {
  const Presentation p = load_presentation(cfg.presentation);
  CountOptions opts = make_options(cfg);
  opts.collect_restrictions = true;
  const std::vector<Rational> radii =
      parse_rational_list(cfg.epsilon.empty() ? "1/4,1/2" : cfg.epsilon);
  Table t;
  t.columns = {"d", "radius", "count", "covering", "covering_exact", "error"};
  for (int d : cfg.d_list) {
    try {
      CountReport rep = cfg.mode == "existential"
                            ? count_exact(p.generators, cfg.n, d, opts).report
                            : count_canonical(p.generators, cfg.n, d, opts);
      fill_covering(rep, radii);
      for (const auto& [radius, result] : rep.covering)
        t.rows.push_back({std::to_string(d), rational_to_string(radius),
                          bigint_to_string(rep.count), std::to_string(result.count),
                          result.exact ? "true" : "false", "-"});
    } catch (const DivisibilityError& e) {
      t.rows.push_back({std::to_string(d), "-", "-", "-", "-", e.what()});
    } catch (const CapExceeded& e) {
      t.rows.push_back({std::to_string(d), "-", "-", "-", "-", e.what()});
    }
  }
  return t;
}

Table cmd_concentrate(const RunConfig& cfg) {
  const Rational eps = parse_rational(cfg.epsilon.empty() ? "1/10" : cfg.epsilon);
  const Rational C = parse_rational(cfg.constant);
  if (cfg.pairs < 1) throw ValidationError("--pairs must be at least 1");
  if (cfg.samples < 0) throw ValidationError("--samples must be nonnegative");
  Table t;
  t.columns = {"d",       "pairs",     "samples",  "seed", "constant",
               "epsilon", "threshold", "successes", "fraction", "error"};
  for (int d : cfg.d_list) {
    std::vector<std::string> row(t.columns.size(), "-");
    row[0] = std::to_string(d);
    row[1] = std::to_string(cfg.pairs);
    row[2] = std::to_string(cfg.samples);
    row[3] = std::to_string(cfg.seed);
    row[4] = rational_to_string(C);
    row[5] = rational_to_string(eps);
    if (d < 2) {
      row[9] = "d must be at least 2 for a fixed-point-free permutation";
      t.rows.push_back(std::move(row));
      continue;
    }
    const CarrierPtr c = Carrier::uniform(d);
    const std::vector<PartialBijection> parts(static_cast<std::size_t>(cfg.pairs),
                                              full_cycle(c));
    const EmbeddedSemigroup g = EmbeddedSemigroup::trivial(d);
    if (cfg.samples == 0) {
      // No draws requested: report the threshold, leave the outcome columns
      // empty, and succeed.
      Rational max_res = 0;
      for (const auto& phi : parts)
        max_res = std::max(max_res, residual(phi, g.orbit_relation()).size);
      row[6] = rational_to_string(C * max_res + eps);
      row[7] = "";
      row[8] = "";
      row[9] = "-";
      t.rows.push_back(std::move(row));
      continue;
    }
    const ConcentrationReport rep = concentration_experiment(
        parts, parts, g, C, eps, static_cast<std::size_t>(cfg.samples), cfg.seed, cfg.workers);
    row[6] = rational_to_string(rep.threshold);
    row[7] = std::to_string(rep.successes);
    row[8] = rational_to_string(rep.fraction);
    row[9] = "-";
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table cmd_split(const RunConfig& cfg) {
  const Presentation p = load_presentation(cfg.presentation);
  const CountOptions opts = make_options(cfg);
  const std::vector<std::string> left_names = split_names(cfg.left);
  const std::vector<std::string> right_names = split_names(cfg.right);
  if (left_names.empty() || right_names.empty())
    throw ValidationError("split needs nonempty --left and --right generator name lists");
  const auto& gens = p.generators.generators();
  auto pick = [&](const std::vector<std::string>& names) {
    std::map<std::string, PartialBijection> out;
    for (const auto& name : names) {
      const auto it = gens.find(name);
      if (it == gens.end()) throw ValidationError("unknown generator '" + name + "'");
      out.emplace(it->first, it->second);
    }
    return GeneratorSet(p.relation, std::move(out));
  };
  for (const auto& name : left_names)
    if (std::find(right_names.begin(), right_names.end(), name) != right_names.end())
      throw ValidationError("generator '" + name + "' appears on both sides");
  const GeneratorSet F1 = pick(left_names);
  const GeneratorSet F2 = pick(right_names);
  const std::vector<PartialBijection> anchor = {
      PartialBijection::from_pairs(p.relation.carrier(), {}),
      PartialBijection::identity(p.relation.carrier())};
  Table t;
  t.columns = {"d",          "left_count", "right_count", "union_count",
               "centralizer", "rhs",        "holds",       "error"};
  for (int d : cfg.d_list) {
    try {
      const SplittingReport rep =
          splitting_check(p.relation, F1, F2, anchor, EmbeddedSemigroup::trivial(d), cfg.n,
                          opts.delta, opts);
      t.rows.push_back({std::to_string(d), bigint_to_string(rep.left_count),
                        bigint_to_string(rep.right_count), bigint_to_string(rep.union_count),
                        bigint_to_string(rep.centralizer), rational_to_string(rep.rhs),
                        rep.holds ? "true" : "false", "-"});
    } catch (const DivisibilityError& e) {
      t.rows.push_back({std::to_string(d), "-", "-", "-", "-", "-", "-", e.what()});
    } catch (const CapExceeded& e) {
      t.rows.push_back({std::to_string(d), "-", "-", "-", "-", "-", "-", e.what()});
    }
  }
  return t;
}

Table cmd_report(const RunConfig& cfg) {
  const Presentation p = load_presentation(cfg.presentation);
  const CountOptions opts = make_options(cfg);
  Table t;
  t.columns = {"d", "count", "ratio", "error"};
  std::vector<std::pair<int, BigInt>> counts;
  for (int d : cfg.d_list) {
    try {
      const CountReport rep = cfg.mode == "existential"
                                  ? count_exact(p.generators, cfg.n, d, opts).report
                                  : count_canonical(p.generators, cfg.n, d, opts);
      counts.emplace_back(d, rep.count);
      t.rows.push_back({std::to_string(d), bigint_to_string(rep.count), fmt_double(rep.ratio),
                        "-"});
    } catch (const DivisibilityError& e) {
      t.rows.push_back({std::to_string(d), "-", "-", e.what()});
    } catch (const CapExceeded& e) {
      t.rows.push_back({std::to_string(d), "-", "-", e.what()});
    }
  }
  if (!counts.empty()) t.footers.push_back("trend: " + growth_report(counts).trend);
  t.footers.push_back("predicted_dimension: " +
                      rational_to_string(predicted_dimension(p.relation)));
  return t;
}

}  // namespace

CliResult run_cli(const std::vector<std::string>& args) {
  CliResult result;
  RunConfig cfg;

  CLI::App app{"Finite-scale sofic dimension laboratory"};
  app.require_subcommand(1);
  std::string d_text;

  struct SubSpec {
    const char* name;
    const char* help;
    const char* d_default;
    bool needs_file;
  };
  const std::vector<SubSpec> specs = {
      {"check", "Validate a presentation file", "2", true},
      {"count", "Sweep microstate counts over target sizes", "2,4,6,8", true},
      {"cover", "Covering numbers of the restriction set", "4", true},
      {"concentrate", "Random-conjugation concentration experiment", "50,100,200", false},
      {"split", "Splitting inequality for a generator partition", "2,4", true},
      {"report", "Growth ratios and qualitative trend", "2,4,6,8", true},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& spec : specs) {
    CLI::App* sub = app.add_subcommand(spec.name, spec.help);
    auto* file = sub->add_option("presentation", cfg.presentation, "presentation file (JSON)");
    if (spec.needs_file) file->required();
    sub->add_option("--d", d_text, "target sizes: list 2,4,6 or range 2..8[:step]");
    sub->add_option("--n", cfg.n, "ball radius")->default_val(2);
    sub->add_option("--delta", cfg.delta, "defect threshold, rational")->default_val("0");
    sub->add_option("--mode", cfg.mode, "counting mode")
        ->default_val("canonical")
        ->check(CLI::IsMember({"canonical", "existential"}));
    sub->add_option("--epsilon", cfg.epsilon,
                    "covering radii list (cover) or threshold offset (concentrate)");
    sub->add_option("--samples", cfg.samples, "sample count")->default_val(1000);
    sub->add_option("--seed", cfg.seed, "deterministic seed")->default_val(1);
    sub->add_option("--constant", cfg.constant, "threshold constant C")->default_val("1");
    sub->add_option("--pairs", cfg.pairs, "alternating factor pairs")->default_val(1);
    sub->add_option("--left", cfg.left, "left generator names, comma-separated");
    sub->add_option("--right", cfg.right, "right generator names, comma-separated");
    sub->add_option("--psi-space-cap", cfg.psi_space_cap, "assignment space cap")
        ->default_val(10000000);
    sub->add_option("--ball-cap", cfg.ball_cap, "ball size cap")->default_val(1000000);
    sub->add_option("--exact-cap", cfg.exact_cap, "exhaustive scan cap")->default_val(10000);
    sub->add_option("--sample-budget", cfg.sample_budget,
                    "when positive, sample this many points over the cap")
        ->default_val(0);
    sub->add_option("--workers", cfg.workers, "worker threads; 0 = available parallelism")
        ->default_val(0);
    sub->add_option("--format", cfg.format, "output format")
        ->default_val("dsv")
        ->check(CLI::IsMember({"dsv", "records"}));
    sub->add_option("--output", cfg.output, "output path; - for stdout")->default_val("-");
    sub->add_flag("--no-timestamp", cfg.no_timestamp, "omit the timestamp header line");
    subs[spec.name] = sub;
  }

  std::vector<const char*> argv = {"soficlab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    std::stringstream hs;
    hs << app.help();
    result.out = hs.str();
    return result;
  } catch (const CLI::ParseError& e) {
    result.err = std::string(e.what()) + "\n";
    result.exit_code = 1;
    return result;
  }

  for (const auto& [name, sub] : subs)
    if (sub->parsed()) cfg.command = name;

  try {
    if (subs.at(cfg.command)->count("--d") == 0)
      for (const auto& spec : specs)
        if (cfg.command == spec.name) d_text = spec.d_default;
    cfg.d_list = parse_d_list(d_text);
    if (cfg.n < 0) throw ValidationError("--n must be nonnegative");
    if (cfg.workers < 0) throw ValidationError("--workers must be nonnegative");
    if (cfg.workers == 0) {
      const unsigned hw = std::thread::hardware_concurrency();
      cfg.workers = hw == 0 ? 1 : static_cast<int>(hw);
    }
    if (cfg.epsilon.empty()) cfg.epsilon = cfg.command == "cover" ? "1/4,1/2" : "1/10";

    Table table;
    if (cfg.command == "check") table = cmd_check(cfg);
    else if (cfg.command == "count") table = cmd_count(cfg);
    else if (cfg.command == "cover") table = cmd_cover(cfg);
    else if (cfg.command == "concentrate") table = cmd_concentrate(cfg);
    else if (cfg.command == "split") table = cmd_split(cfg);
    else table = cmd_report(cfg);

    const std::string report = render(table, cfg, echo_config(cfg));
    if (cfg.output == "-") {
      result.out = report;
    } else {
      std::ofstream f(cfg.output, std::ios::binary);
      if (!f) throw ValidationError("cannot open output file '" + cfg.output + "'");
      f << report;
    }
  } catch (const Error& e) {
    result.err = std::string("error: ") + e.what() + "\n";
    result.exit_code = 1;
  } catch (const std::exception& e) {
    result.err = std::string("error: ") + e.what() + "\n";
    result.exit_code = 1;
  }
  return result;
}

}  // namespace soficlab
