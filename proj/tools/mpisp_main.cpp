// mpisp -- multi-period inspector scheduling: generate benchmark instances,
// solve them with the tabu search, compute assignment-relaxation bounds, and
// aggregate run reports into benchmark tables.
//
// Exit codes: 0 ok, 1 usage error, 2 data error, 3 internal assertion
// (e.g. a heuristic result above the bound).

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "mpisp/instance_io.hpp"
#include "mpisp/report.hpp"
#include "mpisp/search.hpp"
#include "mpisp/solomon.hpp"
#include "mpisp/upper_bound.hpp"

namespace fs = std::filesystem;
using namespace mpisp;

namespace {

constexpr int kOk = 0, kUsage = 1, kData = 2, kAssert = 3;

int worker_count(int jobs) {
  if (const char* env = std::getenv("MPISP_WORKERS")) {
    int n = std::atoi(env);
    if (n >= 1) return std::min(n, jobs);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return std::max(1, std::min<int>(jobs, hw == 0 ? 1 : static_cast<int>(hw)));
}

/// Runs fn(0..jobs-1) over a bounded pool; results land by index, so the
/// output is independent of scheduling.
template <typename Fn>
void parallel_for(int jobs, Fn&& fn) {
  int workers = worker_count(jobs);
  if (workers <= 1) {
    for (int i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) fn(i);
    });
  for (std::thread& th : pool) th.join();
}

std::string config_line(const SearchParams& p) {
  std::ostringstream s;
  s.precision(17);
  s << "eta=" << p.eta << ";n_init=" << p.n_init << ";alpha1=" << p.alpha1
    << ";max_perturbation=" << p.max_perturbation
    << ";max_local_iter=" << p.max_local_iter << ";tenure=" << p.tenure
    << ";beta=" << p.beta1 << ',' << p.beta2 << ',' << p.beta3 << ','
    << p.beta4 << ',' << p.beta5 << ";p=" << p.p_min << ',' << p.p_max << ','
    << p.p_delta << ',' << p.n_max_rep << ";epa_max=" << p.epa_insert_max
    << ";mft=" << p.maximize_mft << ";ls=" << p.use_ls << ";ep=" << p.use_ep
    << ";per=" << p.use_per << ";target=" << p.target_p
    << ";tl=" << p.time_limit_ms << ";v=" << kVersion;
  return s.str();
}

int cmd_gen(const std::string& solomon_dir, const std::string& out_dir,
            std::vector<int> ws, std::vector<int> ms, bool toptw,
            bool round_hundredth, int truncate) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(solomon_dir, ec)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(c));
    if (ext == ".txt") files.push_back(entry.path());
  }
  if (ec) {
    std::cerr << "gen: cannot read " << solomon_dir << ": " << ec.message()
              << "\n";
    return kData;
  }
  std::sort(files.begin(), files.end());
  if (files.empty())
    std::cerr << "gen: warning: no Solomon files under " << solomon_dir
              << "\n";
  if (toptw) ws = {1};

  int written = 0, failed = 0;
  for (const fs::path& f : files) {
    SolomonData data;
    try {
      data = parse_solomon_file(f.string());
      if (truncate > 0 &&
          static_cast<int>(data.nodes.size()) > truncate + 1)
        data.nodes.resize(static_cast<std::size_t>(truncate) + 1);
    } catch (const std::exception& e) {
      std::cerr << "gen: " << e.what() << " (skipped)\n";
      ++failed;
      continue;
    }
    for (int w : ws)
      for (int m : ms) {
        GenOptions opt;
        opt.w = w;
        opt.m = m;
        opt.toptw = toptw;
        opt.rounding = round_hundredth ? TravelRounding::kHundredth
                                       : TravelRounding::kNone;
        try {
          Instance inst = generate_mpisp(data, opt);
          save_instance(inst, (fs::path(out_dir) / (inst.name + ".json")).string());
          ++written;
        } catch (const std::exception& e) {
          std::cerr << "gen: " << f.filename().string() << " w=" << w
                    << " m=" << m << ": " << e.what() << " (skipped)\n";
          ++failed;
        }
      }
  }
  std::cout << "gen: wrote " << written << " instances to " << out_dir;
  if (failed > 0) std::cout << " (" << failed << " failed)";
  std::cout << "\n";
  return kOk;
}

int cmd_solve(const std::string& instance_path, const std::string& out_dir,
              int repeats, std::uint64_t seed, std::uint64_t seed_inc,
              bool toptw, const std::string& epa_insert,
              const std::string& components, bool target_ub, double target_p,
              bool no_ub, std::uint64_t ub_nodes, SearchParams prm) {
  Instance inst;
  try {
    inst = load_instance(instance_path);
  } catch (const std::exception& e) {
    std::cerr << "solve: " << e.what() << "\n";
    return kData;
  }
  if (toptw) {
    if (inst.grid.w != 1) {
      std::cerr << "solve: --toptw expects a single-period instance (w=1), "
                << "got w=" << inst.grid.w << "\n";
      return kUsage;
    }
    inst.Q = kInf;
  }

  if (epa_insert == "max")
    prm.epa_insert_max = true;
  else if (epa_insert != "min") {
    std::cerr << "solve: --epa-insert must be min or max\n";
    return kUsage;
  }
  if (!components.empty()) {
    prm.use_ls = prm.use_ep = prm.use_per = false;
    std::stringstream ss(components);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok == "LS")
        prm.use_ls = true;
      else if (tok == "EP")
        prm.use_ep = true;
      else if (tok == "PER")
        prm.use_per = true;
      else {
        std::cerr << "solve: unknown component '" << tok
                  << "' (expected LS, EP, PER)\n";
        return kUsage;
      }
    }
    if (!prm.use_ls && !prm.use_ep) {
      std::cerr << "solve: --components needs at least one of LS, EP\n";
      return kUsage;
    }
  }
  if (target_ub && no_ub) {
    std::cerr << "solve: --target-ub requires the bound (drop --no-ub)\n";
    return kUsage;
  }

  Problem P = Problem::build(std::move(inst));

  RunReport report;
  report.instance = P.inst.name;
  report.group = group_of(P.inst.name);
  report.w = P.grid().w;
  report.m = P.m();
  report.toptw = toptw || P.q() >= kInf;
  report.base_seed = seed;
  report.seed_increment = seed_inc;

  if (!no_ub) {
    UbModel M = build_model(P);
    UbSolveResult ub = bound_model(P, M, ub_nodes);
    report.ub = ub.bound;
    report.ub_status = ub.optimal ? "optimal" : "bound_only";
    if (target_ub) prm.target_p = ub.bound;
  } else {
    report.ub = kInf;
    report.ub_status = "none";
  }
  if (target_p > 0) prm.target_p = target_p;
  report.cfg_hash = hex64(fnv1a(config_line(prm)));

  std::vector<SearchResult> results(static_cast<std::size_t>(repeats));
  parallel_for(repeats, [&](int i) {
    results[static_cast<std::size_t>(i)] = tabu_search(
        P, prm, seed + static_cast<std::uint64_t>(i) * seed_inc);
  });

  double sum_p = 0.0, sum_s = 0.0;
  for (int i = 0; i < repeats; ++i) {
    const SearchResult& res = results[static_cast<std::size_t>(i)];
    if (auto defect = check_solution(P, res.best)) {
      std::cerr << "solve: internal assertion: run " << i
                << " produced an invalid solution: " << *defect << "\n";
      return kAssert;
    }
    RunResult run;
    run.seed = seed + static_cast<std::uint64_t>(i) * seed_inc;
    run.p = res.best.fit.P;
    run.d = res.best.fit.D;
    run.f = res.best.fit.F;
    run.seconds = res.seconds;
    run.iterations = res.iterations;
    run.solution = format_solution(P, res.best);
    report.max_p = std::max(report.max_p, run.p);
    sum_p += run.p;
    sum_s += run.seconds;
    report.runs.push_back(std::move(run));
  }
  report.avg_p = sum_p / repeats;
  report.avg_seconds = sum_s / repeats;
  if (std::isfinite(report.ub) && report.max_p > report.ub + kFitnessEps) {
    std::cerr << "solve: internal assertion: best workload " << report.max_p
              << " exceeds the bound " << report.ub << "\n";
    return kAssert;
  }

  fs::path dir = fs::path(out_dir) / P.inst.name;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::cerr << "solve: cannot create " << dir.string() << ": "
              << ec.message() << "\n";
    return kData;
  }
  try {
    save_text((dir / "report.json").string(), to_json(report).dump(2) + "\n");
    for (int i = 0; i < repeats; ++i)
      save_text((dir / ("run_" + std::to_string(report.runs[static_cast<std::size_t>(i)].seed) + ".csv"))
                    .string(),
                trace_csv(results[static_cast<std::size_t>(i)]));
  } catch (const std::exception& e) {
    std::cerr << "solve: " << e.what() << "\n";
    return kData;
  }

  std::cout << P.inst.name << ": max=" << report.max_p
            << " avg=" << report.avg_p << " ub=";
  if (std::isfinite(report.ub))
    std::cout << report.ub << " (" << report.ub_status << ")";
  else
    std::cout << "n/a";
  std::cout << " avg_time=" << report.avg_seconds << "s -> "
            << (dir / "report.json").string() << "\n";
  return kOk;
}

int cmd_ub(const std::string& instance_path, const std::string& emit_lp_path,
           bool solve_small, std::uint64_t node_budget,
           const std::string& out_path) {
  if (emit_lp_path.empty() && !solve_small) {
    std::cerr << "ub: nothing to do; pass --emit-lp PATH and/or "
                 "--solve-small\n";
    return kUsage;
  }
  Instance inst;
  try {
    inst = load_instance(instance_path);
  } catch (const std::exception& e) {
    std::cerr << "ub: " << e.what() << "\n";
    return kData;
  }
  Problem P = Problem::build(std::move(inst));
  UbModel M = build_model(P);

  nlohmann::json j;
  j["instance"] = P.inst.name;
  j["vars"] = M.vars();
  j["rows"] = M.rows.size();
  try {
    if (!emit_lp_path.empty()) {
      save_text(emit_lp_path, emit_lp(M, P.inst.name));
      j["lp_file"] = emit_lp_path;
    }
    if (solve_small) {
      auto t0 = std::chrono::steady_clock::now();
      UbSolveResult res = solve_exact_small(P, M, node_budget);
      j["ub"] = res.bound;
      j["status"] = res.optimal ? "optimal" : "bound_only";
      j["nodes"] = res.nodes;
      j["solve_seconds"] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
    } else {
      j["status"] = "emitted";
    }
    std::string text = j.dump(2) + "\n";
    if (!out_path.empty()) save_text(out_path, text);
    std::cout << text;
  } catch (const std::exception& e) {
    std::cerr << "ub: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}

int cmd_report(const std::vector<std::string>& run_dirs,
               const std::string& out_dir) {
  std::vector<fs::path> report_files;
  for (const std::string& dir : run_dirs) {
    std::error_code ec;
    for (auto it = fs::recursive_directory_iterator(dir, ec);
         it != fs::recursive_directory_iterator(); it.increment(ec)) {
      if (ec) break;
      if (it->is_regular_file() && it->path().filename() == "report.json")
        report_files.push_back(it->path());
    }
    if (ec) {
      std::cerr << "report: cannot read " << dir << ": " << ec.message()
                << "\n";
      return kData;
    }
  }
  std::sort(report_files.begin(), report_files.end());

  std::vector<RunReport> reports;
  for (const fs::path& f : report_files) {
    try {
      std::ifstream in(f);
      nlohmann::json j;
      in >> j;
      reports.push_back(report_from_json(j));
    } catch (const std::exception& e) {
      std::cerr << "report: warning: skipping " << f.string() << ": "
                << e.what() << "\n";
    }
  }
  if (reports.empty()) {
    std::cerr << "report: no readable run reports found\n";
    return kData;
  }
  std::vector<const RunReport*> ptrs;
  ptrs.reserve(reports.size());
  for (const RunReport& r : reports) ptrs.push_back(&r);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  try {
    save_text((fs::path(out_dir) / "runs.csv").string(), reports_csv(ptrs));
    save_text((fs::path(out_dir) / "tables.md").string(),
              tables_markdown(ptrs));
    save_text((fs::path(out_dir) / "time_summary.csv").string(),
              time_summary_csv(ptrs));
  } catch (const std::exception& e) {
    std::cerr << "report: " << e.what() << "\n";
    return kData;
  }
  std::cout << "report: aggregated " << reports.size() << " run reports into "
            << out_dir << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "mpisp: multi-period inspector scheduling solver and benchmark tools"};
  app.require_subcommand(1);

  // ---- gen ----
  std::string gen_solomon = "data/solomon", gen_out = "out/instances";
  std::vector<int> gen_w{1, 3, 5}, gen_m{7, 9, 11, 13};
  bool gen_toptw = false, gen_round = false;
  int gen_truncate = 0;
  CLI::App* gen = app.add_subcommand(
      "gen", "Derive benchmark instances from Solomon VRPTW files");
  gen->add_option("--solomon-dir", gen_solomon, "Directory of Solomon .txt files")
      ->capture_default_str();
  gen->add_option("--out", gen_out, "Output directory for instance JSON")
      ->capture_default_str();
  gen->add_option("--w", gen_w, "Period counts")->delimiter(',')->capture_default_str();
  gen->add_option("--m", gen_m, "Inspector counts")->delimiter(',')->capture_default_str();
  gen->add_flag("--toptw", gen_toptw,
                "Team-orienteering mode: w=1, unlimited capacity");
  gen->add_flag("--round-hundredth", gen_round,
                "Round travel times to 0.01");
  gen->add_option("--truncate", gen_truncate,
                  "Keep only the first N suppliers of each file");

  // ---- solve ----
  std::string sol_instance, sol_out = "out/runs", sol_epa = "min",
              sol_components;
  int sol_repeats = 10;
  std::uint64_t sol_seed = 1, sol_seed_inc = 1, sol_ub_nodes = 200'000;
  bool sol_toptw = false, sol_target_ub = false, sol_no_ub = false;
  double sol_target_p = 0.0;
  SearchParams prm;
  CLI::App* solve = app.add_subcommand(
      "solve", "Run the tabu search on one instance (repeated seeded runs)");
  solve->add_option("instance", sol_instance, "Instance JSON file")->required();
  solve->add_option("--out", sol_out, "Run output directory")->capture_default_str();
  solve->add_option("--repeats", sol_repeats, "Independent seeded runs")
      ->capture_default_str();
  solve->add_option("--seed", sol_seed, "Base seed")->capture_default_str();
  solve->add_option("--seed-increment", sol_seed_inc, "Per-repeat seed step")
      ->capture_default_str();
  solve->add_flag("--toptw", sol_toptw,
                  "Treat the instance as TOPTW: unlimited capacity, w must be 1");
  solve->add_option("--epa-insert", sol_epa,
                    "Ejection insertion scoring: min or max")
      ->capture_default_str();
  solve->add_option("--components", sol_components,
                    "Comma subset of LS,EP,PER (ablation; default all)");
  solve->add_flag("--target-ub", sol_target_ub,
                  "Stop a run once it reaches the computed bound");
  solve->add_option("--target-p", sol_target_p,
                    "Stop a run once served workload reaches this value");
  solve->add_flag("--no-ub", sol_no_ub, "Skip the bound computation");
  solve->add_option("--ub-nodes", sol_ub_nodes,
                    "Branch-and-bound node budget for the bound")
      ->capture_default_str();
  solve->add_option("--n-init", prm.n_init, "Initial constructions")
      ->capture_default_str();
  solve->add_option("--alpha1", prm.alpha1, "Construction greediness")
      ->capture_default_str();
  solve->add_option("--max-perturbation", prm.max_perturbation,
                    "Non-improving rounds before stopping")
      ->capture_default_str();
  solve->add_option("--max-local-iter", prm.max_local_iter,
                    "Non-improving local-search rounds")
      ->capture_default_str();
  solve->add_option("--tenure", prm.tenure, "Tabu tenure (0 = plain descent)")
      ->capture_default_str();
  solve->add_option("--eta", prm.eta, "Overload weight in move violations")
      ->capture_default_str();
  solve->add_option("--time-limit-ms", prm.time_limit_ms,
                    "Per-run wall-clock budget (0 = none)")
      ->capture_default_str();

  // ---- ub ----
  std::string ub_instance, ub_lp_path, ub_out;
  bool ub_solve_small = false;
  std::uint64_t ub_nodes = 4'000'000;
  CLI::App* ub = app.add_subcommand(
      "ub", "Build the assignment relaxation; emit LP text or solve it");
  ub->add_option("instance", ub_instance, "Instance JSON file")->required();
  ub->add_option("--emit-lp", ub_lp_path, "Write the model in LP format");
  ub->add_flag("--solve-small", ub_solve_small,
               "Solve exactly by branch-and-bound (small models)");
  ub->add_option("--node-budget", ub_nodes, "Branch-and-bound node budget")
      ->capture_default_str();
  ub->add_option("--out", ub_out, "Also write the JSON bound report here");

  // ---- report ----
  std::vector<std::string> rep_dirs;
  std::string rep_out = "out/tables";
  CLI::App* rep = app.add_subcommand(
      "report", "Aggregate run reports into benchmark tables");
  rep->add_option("dirs", rep_dirs, "Directories holding run reports")
      ->required();
  rep->add_option("--out", rep_out, "Table output directory")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  if (gen->parsed())
    return cmd_gen(gen_solomon, gen_out, gen_w, gen_m, gen_toptw, gen_round,
                   gen_truncate);
  if (solve->parsed()) {
    if (sol_repeats < 1) {
      std::cerr << "solve: --repeats must be >= 1\n";
      return kUsage;
    }
    return cmd_solve(sol_instance, sol_out, sol_repeats, sol_seed,
                     sol_seed_inc, sol_toptw, sol_epa, sol_components,
                     sol_target_ub, sol_target_p, sol_no_ub, sol_ub_nodes,
                     prm);
  }
  if (ub->parsed())
    return cmd_ub(ub_instance, ub_lp_path, ub_solve_small, ub_nodes, ub_out);
  if (rep->parsed()) return cmd_report(rep_dirs, rep_out);
  return kUsage;
}
