#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mpisp/search.hpp"

namespace mpisp {

inline constexpr std::string_view kVersion = "0.1.0";

/// One seeded solver run inside a report.
struct RunResult {
  std::uint64_t seed = 0;
  double p = 0.0, d = 0.0, f = 0.0;
  double seconds = 0.0;
  int iterations = 0;
  std::string solution;  // format_solution text
};

/// Aggregated outcome of `repeats` independent runs on one instance,
/// together with the bound used for gap reporting. Max is over run P values,
/// so Max >= Avg by construction; the CLI refuses to emit a report whose
/// best P exceeds the bound.
struct RunReport {
  std::string instance;
  std::string group;  // benchmark series, e.g. "c1", "rc2"
  int w = 1, m = 1;
  bool toptw = false;
  std::string cfg_hash;
  std::string version{kVersion};
  std::uint64_t base_seed = 1;
  std::uint64_t seed_increment = 1;
  double max_p = 0.0, avg_p = 0.0, avg_seconds = 0.0;
  double ub = 0.0;
  std::string ub_status = "none";  // none | optimal | bound_only | external
  std::vector<RunResult> runs;
};

/// Benchmark series of an instance name: leading letters plus the first
/// digit ("c101_w1_m7" -> "c1", "rc208..." -> "rc2"). Names without that
/// shape fall back to the leading letters alone.
inline std::string group_of(const std::string& instance) {
  std::string g;
  std::size_t i = 0;
  while (i < instance.size() &&
         std::isalpha(static_cast<unsigned char>(instance[i])))
    g += instance[i++];
  if (i < instance.size() && std::isdigit(static_cast<unsigned char>(instance[i])))
    g += instance[i];
  return g;
}

// ----------------------------------------------------------- serialization

namespace detail {

/// JSON has no inf; encode non-finite doubles as strings.
inline nlohmann::json json_num(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

inline double num_from_json(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>() == "-inf" ? -kInf : kInf;
  return j.get<double>();
}

}  // namespace detail

inline nlohmann::json to_json(const RunReport& r) {
  nlohmann::json j;
  j["schema"] = "mpisp-run-report/1";
  j["instance"] = r.instance;
  j["group"] = r.group;
  j["w"] = r.w;
  j["m"] = r.m;
  j["toptw"] = r.toptw;
  j["cfg_hash"] = r.cfg_hash;
  j["version"] = r.version;
  j["base_seed"] = r.base_seed;
  j["seed_increment"] = r.seed_increment;
  j["max_workload"] = r.max_p;
  j["avg_workload"] = r.avg_p;
  j["avg_seconds"] = r.avg_seconds;
  j["ub"] = detail::json_num(r.ub);
  j["ub_status"] = r.ub_status;
  j["runs"] = nlohmann::json::array();
  for (const RunResult& run : r.runs) {
    nlohmann::json rj;
    rj["seed"] = run.seed;
    rj["p"] = run.p;
    rj["d"] = detail::json_num(run.d);
    rj["f"] = run.f;
    rj["seconds"] = run.seconds;
    rj["iterations"] = run.iterations;
    rj["solution"] = run.solution;
    j["runs"].push_back(std::move(rj));
  }
  return j;
}

inline RunReport report_from_json(const nlohmann::json& j) {
  if (j.value("schema", "") != "mpisp-run-report/1")
    throw std::runtime_error("not a run report (schema mismatch)");
  RunReport r;
  r.instance = j.at("instance").get<std::string>();
  r.group = j.value("group", group_of(r.instance));
  r.w = j.at("w").get<int>();
  r.m = j.at("m").get<int>();
  r.toptw = j.value("toptw", false);
  r.cfg_hash = j.value("cfg_hash", "");
  r.version = j.value("version", "");
  r.base_seed = j.value("base_seed", std::uint64_t{0});
  r.seed_increment = j.value("seed_increment", std::uint64_t{1});
  r.max_p = j.at("max_workload").get<double>();
  r.avg_p = j.at("avg_workload").get<double>();
  r.avg_seconds = j.at("avg_seconds").get<double>();
  r.ub = detail::num_from_json(j.at("ub"));
  r.ub_status = j.value("ub_status", "none");
  for (const auto& rj : j.value("runs", nlohmann::json::array())) {
    RunResult run;
    run.seed = rj.at("seed").get<std::uint64_t>();
    run.p = rj.at("p").get<double>();
    run.d = detail::num_from_json(rj.at("d"));
    run.f = rj.at("f").get<double>();
    run.seconds = rj.at("seconds").get<double>();
    run.iterations = rj.value("iterations", 0);
    run.solution = rj.value("solution", "");
    r.runs.push_back(std::move(run));
  }
  return r;
}

/// Per-iteration trace of one run as CSV (current and incumbent fitness,
/// pool size, wall time).
inline std::string trace_csv(const SearchResult& res) {
  std::ostringstream out;
  out.precision(9);
  out << "iter,p,d,f,best_p,pool,elapsed_s\n";
  for (const IterRecord& rec : res.trace) {
    out << rec.iter << ',' << rec.current.P << ',';
    if (rec.current.D >= kInf)
      out << "inf";
    else
      out << rec.current.D;
    out << ',' << rec.current.F << ',' << rec.best.P << ',' << rec.pool_size
        << ',' << rec.elapsed_s << "\n";
  }
  return out.str();
}

// ----------------------------------------------------------------- tables

namespace detail {

inline std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string gap_pct(const RunReport& r) {
  if (!std::isfinite(r.ub) || r.ub <= 0.0) return "n/a";
  return fixed2(100.0 * (r.ub - r.max_p) / r.ub);
}

inline bool row_order(const RunReport* a, const RunReport* b) {
  auto key = [](const RunReport* r) {
    return std::tuple<const std::string&, int, int, const std::string&>(
        r->group, r->w, r->m, r->instance);
  };
  return key(a) < key(b);
}

}  // namespace detail

/// Flat CSV over all reports, one row per (instance, w, m) run set, sorted
/// by (group, w, m, instance).
inline std::string reports_csv(std::vector<const RunReport*> reports) {
  std::sort(reports.begin(), reports.end(), detail::row_order);
  std::ostringstream out;
  out << "instance,group,w,m,toptw,ub,ub_status,max_workload,avg_workload,"
         "gap_pct,avg_seconds\n";
  for (const RunReport* r : reports) {
    out << r->instance << ',' << r->group << ',' << r->w << ',' << r->m << ','
        << (r->toptw ? 1 : 0) << ',';
    if (std::isfinite(r->ub))
      out << detail::fixed2(r->ub);
    else
      out << "inf";
    out << ',' << r->ub_status << ',' << detail::fixed2(r->max_p) << ','
        << detail::fixed2(r->avg_p) << ',' << detail::gap_pct(*r) << ','
        << detail::fixed2(r->avg_seconds) << "\n";
  }
  return out.str();
}

/// Benchmark tables in the usual layout: one table per period count (plus a
/// separate one for team-orienteering runs), rows sorted by (group, m,
/// instance), columns UB / max / avg workload, gap and average time.
inline std::string tables_markdown(std::vector<const RunReport*> reports) {
  std::sort(reports.begin(), reports.end(), detail::row_order);
  std::map<std::pair<bool, int>, std::vector<const RunReport*>> sections;
  for (const RunReport* r : reports)
    sections[{r->toptw, r->w}].push_back(r);
  std::ostringstream out;
  for (const auto& [key, rows] : sections) {
    out << "## " << (key.first ? "TOPTW (w = 1, unlimited capacity)"
                               : "w = " + std::to_string(key.second))
        << "\n\n";
    out << "| instance | group | m | UB | max workload | avg workload | gap % "
           "| avg time (s) |\n";
    out << "|---|---|---:|---:|---:|---:|---:|---:|\n";
    for (const RunReport* r : rows) {
      out << "| " << r->instance << " | " << r->group << " | " << r->m
          << " | ";
      if (std::isfinite(r->ub))
        out << detail::fixed2(r->ub);
      else
        out << "inf";
      out << " | " << detail::fixed2(r->max_p) << " | "
          << detail::fixed2(r->avg_p) << " | " << detail::gap_pct(*r) << " | "
          << detail::fixed2(r->avg_seconds) << " |\n";
    }
    out << "\n";
  }
  return out.str();
}

/// Average running time per (group, w, m) cell -- the cross-configuration
/// summary table.
inline std::string time_summary_csv(std::vector<const RunReport*> reports) {
  std::map<std::tuple<std::string, int, int>, std::pair<double, int>> cells;
  for (const RunReport* r : reports) {
    auto& cell = cells[{r->group, r->w, r->m}];
    cell.first += r->avg_seconds;
    cell.second += 1;
  }
  std::ostringstream out;
  out << "group,w,m,avg_seconds,reports\n";
  for (const auto& [key, cell] : cells)
    out << std::get<0>(key) << ',' << std::get<1>(key) << ','
        << std::get<2>(key) << ',' << detail::fixed2(cell.first / cell.second)
        << ',' << cell.second << "\n";
  return out.str();
}

}  // namespace mpisp
