#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "soficlab/commands.hpp"
#include "soficlab/presentation.hpp"

using namespace soficlab;

namespace {

std::string corpus(const std::string& name) {
  return std::string(SOFICLAB_SOURCE_DIR) + "/instances/" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// A parsed report: comment lines, column names, and rows as column -> cell.
struct Report {
  std::vector<std::string> comments;
  std::vector<std::map<std::string, std::string>> rows;
};

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, '\t')) out.push_back(cell);
  if (!line.empty() && line.back() == '\t') out.push_back("");
  return out;
}

Report parse_report(const std::string& text) {
  Report rep;
  std::vector<std::string> header;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      rep.comments.push_back(line);
      continue;
    }
    if (header.empty()) {
      header = split_tabs(line);
      continue;
    }
    const std::vector<std::string> cells = split_tabs(line);
    REQUIRE(cells.size() == header.size());
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = cells[i];
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace

TEST_CASE("corpus presentation files round-trip bit-exactly") {
  for (const std::string name : {"swap.json", "two_swaps.json", "triple.json",
                                 "identity2.json"}) {
    const std::string bytes = slurp(corpus(name));
    const Presentation p = parse_presentation(bytes);
    CHECK(serialize_presentation(p.relation, p.generators) == bytes);
  }
}

TEST_CASE("count sweep reproduces the factorial family and flags indivisible sizes") {
  const CliResult r = run_cli({"count", corpus("swap.json"), "--d", "2,3,4,6,8",
                               "--no-timestamp"});
  REQUIRE(r.exit_code == 0);
  const Report rep = parse_report(r.out);
  REQUIRE(rep.rows.size() == 5);
  const std::map<std::string, std::string> expect_count = {
      {"2", "2"}, {"3", "0"}, {"4", "12"}, {"6", "120"}, {"8", "1680"}};
  for (const auto& row : rep.rows) {
    CHECK(row.at("count") == expect_count.at(row.at("d")));
    CHECK(row.at("predicted_dimension") == "1/2");
    if (row.at("d") == "3") {
      CHECK(row.at("error").find("divisib") != std::string::npos);
      CHECK(row.at("embeddings_total") == "0");
    } else {
      CHECK(row.at("error") == "-");
      CHECK(row.at("embeddings_total") == row.at("count"));
    }
  }
  CHECK(rep.rows[2].at("ratio") == "0.448120");
  CHECK(rep.rows[1].at("ratio") == "-inf");

  // The identity-generator instance counts one restriction at every size.
  const CliResult one = run_cli({"count", corpus("identity2.json"), "--d", "2,4",
                                 "--no-timestamp"});
  REQUIRE(one.exit_code == 0);
  for (const auto& row : parse_report(one.out).rows) {
    CHECK(row.at("count") == "1");
    CHECK(row.at("ratio") == "0.000000");
  }
}

TEST_CASE("check reports the generation verdict and rejects invalid files") {
  const CliResult ok = run_cli({"check", corpus("swap.json"), "--no-timestamp"});
  REQUIRE(ok.exit_code == 0);
  const Report rep = parse_report(ok.out);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].at("points") == "2");
  CHECK(rep.rows[0].at("total_weight") == "1");
  CHECK(rep.rows[0].at("dynamically_generating") == "true");

  const CliResult idle = run_cli({"check", corpus("identity2.json"), "--no-timestamp"});
  REQUIRE(idle.exit_code == 0);
  CHECK(parse_report(idle.out).rows[0].at("dynamically_generating") == "false");

  // A generator that crosses classes is rejected with the offending pair.
  const std::string bad_path = "/tmp/soficlab_bad_presentation.json";
  {
    std::ofstream f(bad_path, std::ios::binary);
    f << "{\n  \"weights\": [\"1/4\", \"1/4\", \"1/4\", \"1/4\"],\n"
         "  \"classes\": [[0, 1], [2, 3]],\n"
         "  \"generators\": {\"x\": {\"0\": 2}}\n}\n";
  }
  const CliResult bad = run_cli({"check", bad_path, "--no-timestamp"});
  CHECK(bad.exit_code == 1);
  CHECK(bad.err.find("0") != std::string::npos);
  CHECK(bad.err.find("2") != std::string::npos);
  std::remove(bad_path.c_str());

  const CliResult missing = run_cli({"check", "/nonexistent/missing.json"});
  CHECK(missing.exit_code == 1);
  CHECK(!missing.err.empty());
}

TEST_CASE("identical configurations render byte-identical reports") {
  const std::vector<std::string> args = {"count", corpus("swap.json"), "--d", "2,4",
                                         "--no-timestamp"};
  const CliResult a = run_cli(args);
  const CliResult b = run_cli(args);
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);

  // With timestamps, only the generated line may differ.
  const CliResult ta = run_cli({"count", corpus("swap.json"), "--d", "2"});
  const CliResult tb = run_cli({"count", corpus("swap.json"), "--d", "2"});
  std::stringstream sa(ta.out), sb(tb.out);
  std::string la, lb;
  bool saw_timestamp = false;
  while (std::getline(sa, la) && std::getline(sb, lb)) {
    if (la.rfind("# generated:", 0) == 0) {
      saw_timestamp = true;
      CHECK(lb.rfind("# generated:", 0) == 0);
    } else {
      CHECK(la == lb);
    }
  }
  CHECK(saw_timestamp);

  // Worker count never changes the computed rows.
  auto rows_only = [](const std::string& text) {
    std::string out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line))
      if (!line.empty() && line[0] != '#') out += line + "\n";
    return out;
  };
  const CliResult w1 = run_cli({"concentrate", "--d", "50", "--samples", "200",
                                "--workers", "1", "--no-timestamp"});
  const CliResult w3 = run_cli({"concentrate", "--d", "50", "--samples", "200",
                                "--workers", "3", "--no-timestamp"});
  REQUIRE(w1.exit_code == 0);
  CHECK(rows_only(w1.out) == rows_only(w3.out));
}

TEST_CASE("records format carries the same cells as the table") {
  const CliResult r = run_cli({"count", corpus("swap.json"), "--d", "4", "--format",
                               "records", "--no-timestamp"});
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("[record 1]") != std::string::npos);
  CHECK(r.out.find("count = 12") != std::string::npos);
  CHECK(r.out.find("predicted_dimension = 1/2") != std::string::npos);
}

TEST_CASE("split command certifies the inequality on the corpus") {
  const CliResult r = run_cli({"split", corpus("two_swaps.json"), "--left", "s",
                               "--right", "t", "--d", "2,4", "--no-timestamp"});
  REQUIRE(r.exit_code == 0);
  const Report rep = parse_report(r.out);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].at("holds") == "true");
  CHECK(rep.rows[1].at("holds") == "true");
  CHECK(rep.rows[1].at("union_count") == "24");
  CHECK(rep.rows[1].at("rhs") == "144");

  CHECK(run_cli({"split", corpus("two_swaps.json"), "--left", "s", "--right", "s",
                 "--d", "2"})
            .exit_code == 1);
  CHECK(run_cli({"split", corpus("two_swaps.json"), "--left", "s", "--right", "nope",
                 "--d", "2"})
            .exit_code == 1);
  CHECK(run_cli({"split", corpus("two_swaps.json"), "--left", "s", "--d", "2"})
            .exit_code == 1);
}

TEST_CASE("concentrate reproduces per seed and honors a zero sample budget") {
  const std::vector<std::string> args = {"concentrate", "--d", "50", "--samples", "300",
                                         "--seed", "9", "--no-timestamp"};
  const CliResult a = run_cli(args);
  const CliResult b = run_cli(args);
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
  CHECK(parse_report(a.out).rows[0].at("threshold") == "1/10");

  const CliResult zero = run_cli({"concentrate", "--d", "10", "--samples", "0",
                                  "--no-timestamp"});
  REQUIRE(zero.exit_code == 0);
  const Report rep = parse_report(zero.out);
  CHECK(rep.rows[0].at("fraction") == "");
  CHECK(rep.rows[0].at("successes") == "");
  CHECK(rep.rows[0].at("error") == "-");

  const CliResult tiny = run_cli({"concentrate", "--d", "1", "--no-timestamp"});
  REQUIRE(tiny.exit_code == 0);
  CHECK(parse_report(tiny.out).rows[0].at("error").find("fixed-point-free") !=
        std::string::npos);
}

TEST_CASE("cover reports covering numbers per radius") {
  const CliResult r = run_cli({"cover", corpus("swap.json"), "--d", "4", "--epsilon",
                               "1/4,1/2,2", "--no-timestamp"});
  REQUIRE(r.exit_code == 0);
  const Report rep = parse_report(r.out);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[0].at("covering") == "12");
  CHECK(rep.rows[1].at("covering") == "12");
  CHECK(rep.rows[2].at("covering") == "1");
  for (const auto& row : rep.rows) CHECK(row.at("covering_exact") == "true");
}

TEST_CASE("report prints growth ratios with a qualitative trend footer") {
  const CliResult r = run_cli({"report", corpus("swap.json"), "--no-timestamp"});
  REQUIRE(r.exit_code == 0);
  const Report rep = parse_report(r.out);
  REQUIRE(rep.rows.size() == 4);
  CHECK(rep.rows[3].at("count") == "1680");
  bool trend = false, predicted = false;
  for (const auto& c : rep.comments) {
    if (c.find("# trend:") == 0) trend = true;
    if (c == "# predicted_dimension: 1/2") predicted = true;
  }
  CHECK(trend);
  CHECK(predicted);
}

TEST_CASE("usage errors exit nonzero and help exits clean") {
  CHECK(run_cli({}).exit_code == 1);
  CHECK(run_cli({"count"}).exit_code == 1);  // missing presentation
  CHECK(run_cli({"frobnicate"}).exit_code == 1);
  CHECK(run_cli({"count", corpus("swap.json"), "--mode", "nonsense"}).exit_code == 1);
  CHECK(run_cli({"count", corpus("swap.json"), "--d", ""}).exit_code == 1);
  CHECK(run_cli({"count", corpus("swap.json"), "--d", "0"}).exit_code == 1);
  CHECK(run_cli({"count", corpus("swap.json"), "--delta", "-1/2"}).exit_code == 1);
  CHECK(run_cli({"concentrate", "--epsilon", "garbage"}).exit_code == 1);

  const CliResult help = run_cli({"--help"});
  CHECK(help.exit_code == 0);
  CHECK(help.out.find("count") != std::string::npos);

  // Reports can be written to a file instead of stdout.
  const std::string path = "/tmp/soficlab_report_out.txt";
  const CliResult filed = run_cli({"count", corpus("swap.json"), "--d", "2", "--output",
                                   path, "--no-timestamp"});
  REQUIRE(filed.exit_code == 0);
  CHECK(filed.out.empty());
  CHECK(slurp(path).rfind("# soficlab count", 0) == 0);
  std::remove(path.c_str());
}
