#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hexfem/bench.hpp"
#include "hexfem/cli.hpp"
#include "json.hpp"

using namespace hexfem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/hexfem_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("run emits a record with exactly the documented JSON fields") {
  TempFile tmp("run.json");
  const int rc = cli_main({"run", "--bp", "bp3", "--degree", "2", "--elems", "2x2x2",
                           "--iters", "5", "--format", "json", "--out", tmp.path});
  CHECK(rc == 0);
  const auto j = nlohmann::json::parse(read_file(tmp.path));
  const std::vector<std::string> keys{"bp", "p", "q", "E", "n", "P",
                                      "iterations", "seconds", "dofs_rate", "n_per_rank"};
  CHECK(j.size() == keys.size());
  for (const auto& k : keys) CHECK(j.contains(k));
  CHECK(j.at("bp") == "bp3");
  CHECK(j.at("p") == 2);
  CHECK(j.at("q") == 4);
  CHECK(j.at("E") == 8);
  CHECK(j.at("n") == 27);
  CHECK(j.at("iterations") == 5);
}

TEST_CASE("run in csv format") {
  TempFile tmp("run.csv");
  const int rc = cli_main({"run", "--bp", "bp1", "--degree", "1", "--elems", "2x2x2",
                           "--iters", "3", "--format", "csv", "--out", tmp.path});
  CHECK(rc == 0);
  std::istringstream in(read_file(tmp.path));
  std::string header, row;
  REQUIRE(std::getline(in, header));
  CHECK(header == "bp,p,q,E,n,P,iterations,seconds,dofs_rate,n_per_rank");
  REQUIRE(std::getline(in, row));
  CHECK(row.substr(0, 4) == "bp1,");
}

TEST_CASE("run in solve mode reports the converged iteration count") {
  TempFile tmp("solve.json");
  const int rc = cli_main({"run", "--bp", "bp1", "--degree", "2", "--elems", "2x2x2",
                           "--mode", "solve", "--tol", "1e-9", "--out", tmp.path});
  CHECK(rc == 0);
  const auto j = nlohmann::json::parse(read_file(tmp.path));
  CHECK(j.at("iterations").get<int>() >= 1);
  CHECK(j.at("iterations").get<int>() < 2000);
}

TEST_CASE("sweep emits the documented CSV table") {
  TempFile tmp("sweep.csv");
  const int rc = cli_main({"sweep", "--bp", "bp1", "--degree", "1", "--elems",
                           "1x1x1,2x2x2", "--threads", "1,2", "--iters", "3", "--out",
                           tmp.path});
  CHECK(rc == 0);
  std::istringstream in(read_file(tmp.path));
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == sweep_csv_header());
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string field;
    int cols = 0;
    while (std::getline(fields, field, ',')) ++cols;
    CHECK(cols == 11);
    ++rows;
  }
  CHECK(rows == 4);
}

TEST_CASE("verify honors exit codes") {
  CHECK(cli_main({"verify", "--bp", "bp1", "--degree", "2", "--elems", "2x2x2"}) == 0);
  CHECK(cli_main({"verify", "--bp", "bp5", "--degree", "3", "--elems", "2x2x2",
                  "--deform", "sine"}) == 0);
  // an unachievable tolerance is a verification failure, not a usage error
  CHECK(cli_main({"verify", "--bp", "bp1", "--degree", "3", "--elems", "2x2x2",
                  "--deform", "sine", "--tol", "1e-15"}) == 1);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(cli_main({"run", "--bp", "bp9", "--degree", "2", "--elems", "2x2x2"}) == 2);
  CHECK(cli_main({"run", "--bp", "bp1", "--degree", "2", "--elems", "nope"}) == 2);
  CHECK(cli_main({"run", "--bp", "bp1", "--degree", "2", "--elems", "2x2x2",
                  "--format", "yaml"}) == 2);
  CHECK(cli_main({"run", "--bp", "bp1", "--degree", "2", "--elems", "2x2x2",
                  "--unknown-flag"}) == 2);
  CHECK(cli_main({"sweep", "--bp", "bp1", "--degree", "1", "--elems", "2x2x2",
                  "--threads", "2,4"}) == 2);
  CHECK(cli_main({"nonsense"}) == 2);
  CHECK(cli_main({"run"}) == 2);
}

TEST_CASE("quadcheck passes on the built-in rules") {
  CHECK(cli_main({"quadcheck", "--max-q", "8"}) == 0);
}
