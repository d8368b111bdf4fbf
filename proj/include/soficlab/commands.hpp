#pragma once

// Batch front-end: parse a command line, load presentation files, run
// counting sweeps and experiments, and render deterministic reports.
//
// Subcommands: check, count, cover, concentrate, split, report.
// Reports start with '#' header lines echoing the resolved configuration,
// then a delimiter-separated table (or structured records with --format
// records). Identical configurations produce byte-identical reports except
// for the timestamp line, which --no-timestamp removes. Per-row conditions
// (divisibility, caps) are recorded in the row's error column and never
// abort a sweep; the exit status is nonzero only for fatal errors (bad
// arguments, unreadable or invalid input files).

#include <cstdint>
#include <string>
#include <vector>

namespace soficlab {

// Everything a run needs, with one documented default per field.
struct RunConfig {
  std::string command;             // required subcommand
  std::string presentation;        // path; "-" means none (concentrate only)
  std::vector<int> d_list;         // --d; default depends on the command
  int n = 2;                       // --n ball radius
  std::string delta = "0";         // --delta defect threshold, "num/den"
  std::string mode = "canonical";  // --mode canonical|existential
  std::string epsilon;             // --epsilon list; cover radii or
                                   // concentrate threshold offset
  long samples = 1000;             // --samples
  std::uint64_t seed = 1;          // --seed
  std::string constant = "1";      // --constant C in C*max|Res| + eps
  int pairs = 1;                   // --pairs alternating factors
  std::string left;                // --left generator names (split)
  std::string right;               // --right generator names (split)
  long psi_space_cap = 10000000;   // --psi-space-cap
  long ball_cap = 1000000;         // --ball-cap
  long exact_cap = 10000;          // --exact-cap
  long sample_budget = 0;          // --sample-budget; >0 samples over cap
  int workers = 0;                 // --workers; 0 = available parallelism
  std::string format = "dsv";      // --format dsv|records
  std::string output = "-";        // --output path; "-" = stdout
  bool no_timestamp = false;       // --no-timestamp
};

struct CliResult {
  int exit_code = 0;
  std::string out;  // the rendered report when output is "-"
  std::string err;  // fatal error messages
};

// Run one invocation; args excludes the program name.
CliResult run_cli(const std::vector<std::string>& args);

}  // namespace soficlab
