#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mpisp/report.hpp"

using namespace mpisp;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RunReport make_report(const std::string& instance, int w, int m, double max_p,
                      double ub, bool toptw = false) {
  RunReport r;
  r.instance = instance;
  r.group = group_of(instance);
  r.w = w;
  r.m = m;
  r.toptw = toptw;
  r.cfg_hash = "cfg";
  r.base_seed = 1;
  r.max_p = max_p;
  r.avg_p = max_p - 5.5;
  r.avg_seconds = 10.0 * w + m;
  r.ub = ub;
  r.ub_status = std::isfinite(ub) ? "optimal" : "none";
  return r;
}

// Deterministic grid of reports: three instances from three series, every
// (w, m) cell, one infinite bound, one team-orienteering run. Shuffled so
// the formatting functions have to sort.
std::vector<RunReport> layout_reports() {
  std::vector<RunReport> all;
  for (int m : {13, 7})
    for (int w : {3, 1, 5})
      for (const char* name : {"r201", "c101", "c102"}) {
        double base = 1000.0 + 10.0 * w + m;
        double ub = (std::string(name) == "r201" && w == 5 && m == 13)
                        ? kInf
                        : base + 50.0;
        all.push_back(make_report(name, w, m, base, ub));
      }
  all.push_back(make_report("c101_toptw", 1, 2, 777.0, 810.0, true));
  return all;
}

std::vector<const RunReport*> pointers(const std::vector<RunReport>& all) {
  std::vector<const RunReport*> ptrs;
  for (const RunReport& r : all) ptrs.push_back(&r);
  return ptrs;
}

}  // namespace

TEST_CASE("instance names map to benchmark series", "[report]") {
  CHECK(group_of("c101_w1_m7") == "c1");
  CHECK(group_of("rc208_w5_m13") == "rc2");
  CHECK(group_of("r211") == "r2");
  CHECK(group_of("c101_toptw") == "c1");
  CHECK(group_of("toy") == "toy");    // no digit: letters alone
  CHECK(group_of("x9rest") == "x9");  // only the first digit counts
  CHECK(group_of("") == "");
}

TEST_CASE("run reports survive the JSON round trip", "[report]") {
  RunReport r = make_report("rc105_w3_m9", 3, 9, 1200.0, kInf);
  r.toptw = false;
  r.seed_increment = 7;
  RunResult run;
  run.seed = 42;
  run.p = 1200.0;
  run.d = -kInf;  // non-finite run statistics must survive as well
  run.f = 88.25;
  run.seconds = 1.5;
  run.iterations = 17;
  run.solution = "P=1200 D=0 F=88.25\npool:\n";
  r.runs.push_back(run);

  nlohmann::json j = to_json(r);
  CHECK(j["schema"] == "mpisp-run-report/1");
  CHECK(j["ub"] == "inf");          // infinities encode as strings
  CHECK(j["runs"][0]["d"] == "-inf");

  // The JSON text itself must be serialisable (no NaN/inf leaks).
  REQUIRE_NOTHROW(j.dump());

  RunReport back = report_from_json(j);
  CHECK(back.instance == r.instance);
  CHECK(back.group == "rc1");
  CHECK(back.w == 3);
  CHECK(back.m == 9);
  CHECK(back.toptw == false);
  CHECK(back.cfg_hash == "cfg");
  CHECK(back.version == std::string(kVersion));
  CHECK(back.base_seed == 1);
  CHECK(back.seed_increment == 7);
  CHECK(back.max_p == Catch::Approx(1200.0));
  CHECK(back.avg_p == Catch::Approx(1194.5));
  CHECK(back.ub >= kInf);
  REQUIRE(back.runs.size() == 1);
  CHECK(back.runs[0].seed == 42);
  CHECK(back.runs[0].d <= -kInf);
  CHECK(back.runs[0].f == Catch::Approx(88.25));
  CHECK(back.runs[0].iterations == 17);
  CHECK(back.runs[0].solution == run.solution);
}

TEST_CASE("foreign JSON is rejected by schema", "[report]") {
  nlohmann::json j;
  j["schema"] = "something-else/9";
  CHECK_THROWS_AS(report_from_json(j), std::runtime_error);
  CHECK_THROWS_AS(report_from_json(nlohmann::json::object()),
                  std::runtime_error);
}

TEST_CASE("trace CSV lists one row per iteration", "[report]") {
  SearchResult res;
  res.trace.push_back({1, Fitness{10.0, 2.5, 3.0}, Fitness{10.0, 2.5, 3.0}, 1,
                       0.25});
  res.trace.push_back({2, Fitness{12.0, kInf, 4.0}, Fitness{12.0, kInf, 4.0},
                       0, 0.5});
  CHECK(trace_csv(res) ==
        "iter,p,d,f,best_p,pool,elapsed_s\n"
        "1,10,2.5,3,10,1,0.25\n"
        "2,12,inf,4,12,0,0.5\n");
}

TEST_CASE("flat CSV is sorted by series and shape", "[report]") {
  std::vector<RunReport> all = layout_reports();
  std::string csv = reports_csv(pointers(all));

  std::vector<std::string> lines;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  REQUIRE(lines.size() == all.size() + 1);
  CHECK(lines[0] ==
        "instance,group,w,m,toptw,ub,ub_status,max_workload,avg_workload,"
        "gap_pct,avg_seconds");

  // Row keys (group, w, m, instance) ascend over the whole file.
  std::vector<std::tuple<std::string, int, int, std::string>> keys;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::istringstream row(lines[i]);
    std::string inst, group, w, m;
    std::getline(row, inst, ',');
    std::getline(row, group, ',');
    std::getline(row, w, ',');
    std::getline(row, m, ',');
    keys.emplace_back(group, std::stoi(w), std::stoi(m), inst);
  }
  CHECK(std::is_sorted(keys.begin(), keys.end()));

  // Spot-check one fully formatted row: c101, w=1, m=7 has max 1017,
  // ub 1067, gap 100*(1067-1017)/1067 = 4.69%.
  CHECK(csv.find("c101,c1,1,7,0,1067.00,optimal,1017.00,1011.50,4.69,17.00\n") !=
        std::string::npos);
  // The infinite bound renders as inf with an n/a gap.
  CHECK(csv.find("r201,r2,5,13,0,inf,none,1063.00,1057.50,n/a,63.00\n") !=
        std::string::npos);
}

TEST_CASE("benchmark tables follow the frozen layout", "[report]") {
  std::vector<RunReport> all = layout_reports();
  std::string text = tables_markdown(pointers(all));
  CHECK(text == read_file(std::string(MPISP_REPO_DIR) +
                          "/tests/golden/tables_layout.md"));

  // One table per period count plus one for team-orienteering runs.
  CHECK(text.find("## w = 1\n") != std::string::npos);
  CHECK(text.find("## w = 3\n") != std::string::npos);
  CHECK(text.find("## w = 5\n") != std::string::npos);
  CHECK(text.find("## TOPTW (w = 1, unlimited capacity)\n") !=
        std::string::npos);
}

TEST_CASE("single report renders as a one-row table", "[report]") {
  RunReport r = make_report("c205_w3_m11", 3, 11, 1400.0, 1400.0);
  std::string text = tables_markdown({&r});
  CHECK(text ==
        "## w = 3\n\n"
        "| instance | group | m | UB | max workload | avg workload | gap % "
        "| avg time (s) |\n"
        "|---|---|---:|---:|---:|---:|---:|---:|\n"
        "| c205_w3_m11 | c2 | 11 | 1400.00 | 1400.00 | 1394.50 | 0.00 | "
        "41.00 |\n\n");
}

TEST_CASE("time summary averages per cell", "[report]") {
  RunReport a = make_report("c101", 1, 7, 100.0, 150.0);
  RunReport b = make_report("c102", 1, 7, 100.0, 150.0);
  RunReport c = make_report("r101", 1, 7, 100.0, 150.0);
  a.avg_seconds = 10.0;
  b.avg_seconds = 20.0;
  c.avg_seconds = 99.0;
  std::string csv = time_summary_csv({&a, &b, &c});
  CHECK(csv ==
        "group,w,m,avg_seconds,reports\n"
        "c1,1,7,15.00,2\n"
        "r1,1,7,99.00,1\n");
}
