#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>
#include <string>

#include "mpisp/upper_bound.hpp"

using namespace mpisp;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string golden_path(const char* name) {
  return std::string(MPISP_REPO_DIR) + "/tests/golden/" + name;
}

// One supplier, one inspector, one period: travel 0<->1 is 5, workload 10,
// service 10, window [0, 50] on a 100-long horizon, capacity 20. Small
// enough to verify the whole emitted text by hand.
Instance one_var_instance() {
  Instance inst;
  inst.name = "one_var";
  inst.source = "synthetic";
  inst.m = 1;
  inst.Q = 20.0;
  inst.grid = PeriodGrid{1, 100.0};
  inst.suppliers = {{1, 3.0, 4.0, 10.0, 10.0, 0.0, 50.0}};
  build_travel(inst);
  return inst;
}

// Nine suppliers on a line at unit spacing, distinct integer workloads:
// the objective and the capacity row both exceed the eight-terms-per-line
// budget, pinning the continuation-line format.
Instance nine_var_instance() {
  Instance inst;
  inst.name = "wrap";
  inst.source = "synthetic";
  inst.m = 1;
  inst.Q = 30.0;
  inst.grid = PeriodGrid{1, 100.0};
  for (int i = 1; i <= 9; ++i)
    inst.suppliers.push_back(
        {i, static_cast<double>(i), 0.0, static_cast<double>(i), 5.0, 0.0, 40.0});
  build_travel(inst);
  return inst;
}

}  // namespace

TEST_CASE("one-variable model emits the frozen LP text", "[lp]") {
  Problem P = Problem::build(one_var_instance());
  UbModel M = build_model(P);
  REQUIRE(M.vars() == 1);
  CHECK(emit_lp(M, "one_var") == read_file(golden_path("one_var.lp")));

  // The frozen text describes a solvable model whose optimum is the single
  // supplier's workload.
  UbSolveResult res = solve_exact_small(P, M);
  REQUIRE(res.optimal);
  CHECK(res.value == Catch::Approx(10.0));
  CHECK(res.bound == Catch::Approx(10.0));
}

TEST_CASE("long rows wrap onto continuation lines as frozen", "[lp]") {
  Problem P = Problem::build(nine_var_instance());
  UbModel M = build_model(P);
  REQUIRE(M.vars() == 9);
  std::string text = emit_lp(M, "wrap");
  CHECK(text == read_file(golden_path("wrap.lp")));
  CHECK(text.find("\n   ") != std::string::npos);  // continuation indent
}

TEST_CASE("supplier-free model emits an empty constraint body", "[lp]") {
  Instance inst;
  inst.name = "empty";
  inst.source = "synthetic";
  inst.m = 2;
  inst.Q = kInf;
  inst.grid = PeriodGrid{2, 50.0};
  build_travel(inst);
  Problem P = Problem::build(std::move(inst));
  UbModel M = build_model(P);
  REQUIRE(M.vars() == 0);
  CHECK(emit_lp(M, "empty") ==
        "\\ empty assignment relaxation (maximise served workload)\n"
        "\\ suppliers=0 inspectors=2 periods=2 vars=0 fixed=0\n"
        "\\ rows: assign=0 period=0 conflict=0 capacity=0 return=0"
        " period_budget=0\n"
        "Maximize\n obj:\nSubject To\nBounds\nBinaries\nEnd\n");
}
