#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpisp/search.hpp"
#include "mpisp/upper_bound.hpp"
#include "support/oracles.hpp"
#include "support/tinygen.hpp"

using namespace mpisp;
using namespace mpisp::testing;

namespace {

/// 0/1 knapsack where value equals weight (integer workloads).
int knapsack_dp(const std::vector<int>& d, int cap) {
  std::vector<int> best(static_cast<std::size_t>(cap) + 1, 0);
  for (int w : d)
    for (int c = cap; c >= w; --c)
      best[static_cast<std::size_t>(c)] =
          std::max(best[static_cast<std::size_t>(c)],
                   best[static_cast<std::size_t>(c - w)] + w);
  return best[static_cast<std::size_t>(cap)];
}

/// Exhaustive optimum of the assignment model itself: every supplier picks
/// "skip" or one live (inspector, period) variable; rows are evaluated
/// verbatim. Only usable for a handful of suppliers.
double brute_force_model(const UbModel& M) {
  std::vector<std::vector<int>> opts(static_cast<std::size_t>(M.n) + 1);
  for (int i = 1; i <= M.n; ++i) {
    opts[static_cast<std::size_t>(i)].push_back(-1);
    for (int k = 1; k <= M.m; ++k)
      for (int p = 1; p <= M.w; ++p)
        if (!M.fixed_zero[M.index(i, k, p)])
          opts[static_cast<std::size_t>(i)].push_back(M.index(i, k, p));
  }
  std::vector<double> x(static_cast<std::size_t>(M.vars()), 0.0);
  double best = 0.0;
  auto rec = [&](auto&& self, int i) -> void {
    if (i > M.n) {
      for (const UbRow& row : M.rows) {
        double lhs = 0.0;
        for (const UbTerm& t : row.terms)
          lhs += t.coef * x[static_cast<std::size_t>(t.var)];
        if (lhs > row.rhs + 1e-9) return;
      }
      double val = 0.0;
      for (int v = 0; v < M.vars(); ++v)
        val += M.obj[static_cast<std::size_t>(v)] * x[static_cast<std::size_t>(v)];
      best = std::max(best, val);
      return;
    }
    for (int o : opts[static_cast<std::size_t>(i)]) {
      if (o >= 0) x[static_cast<std::size_t>(o)] = 1.0;
      self(self, i + 1);
      if (o >= 0) x[static_cast<std::size_t>(o)] = 0.0;
    }
  };
  rec(rec, 1);
  return best;
}

/// Depot at the origin, suppliers packed into a small box with a huge
/// horizon and full windows: every time-based row is slack by construction,
/// leaving capacity as the only binding constraint.
Instance knapsack_style_instance(Rng& rng, int n, int q) {
  Instance inst;
  inst.name = "knap";
  inst.source = "synthetic";
  inst.m = 1;
  inst.Q = q;
  inst.grid = {1, 10000.0};
  for (int i = 1; i <= n; ++i) {
    Supplier s;
    s.id = i;
    s.x = rng.uniform(0.0, 5.0);
    s.y = rng.uniform(0.0, 5.0);
    s.workload = rng.uniform_int(5, 25);
    s.service = rng.uniform(0.5, 3.0);
    s.e = 0.0;
    s.l = inst.grid.horizon;
    inst.suppliers.push_back(s);
  }
  build_travel(inst);
  return inst;
}

}  // namespace

TEST_CASE("pair compatibility covers every feasible one- and two-stop route",
          "[ub]") {
  Rng rng(4401);
  TinyGenOptions opt;
  opt.n_min = 6;
  opt.n_max = 10;
  int feasible_pairs = 0;
  for (int trial = 0; trial < 40; ++trial) {
    Instance inst = random_instance(rng, opt);
    Problem P = Problem::build(inst);
    UbCoeffs co = derive_coefficients(P);
    TransitFn transit = oracle_transit_fn(P.inst);
    for (int i = 1; i <= P.n(); ++i) {
      if (simulate_route(P.inst, transit, {i}).feasible)
        REQUIRE(co.f1[i] == 1);
      for (int j = i + 1; j <= P.n(); ++j) {
        bool ij = simulate_route(P.inst, transit, {i, j}).feasible;
        bool ji = simulate_route(P.inst, transit, {j, i}).feasible;
        if (ij || ji) {
          ++feasible_pairs;
          REQUIRE(co.f3[i][j] == 1);
          REQUIRE(co.f1[i] == 1);
          REQUIRE(co.f1[j] == 1);
        }
      }
    }
  }
  CHECK(feasible_pairs > 200);  // the corpus actually exercised the claim
}

TEST_CASE("wide-horizon single-inspector bound reduces to a knapsack",
          "[ub]") {
  Rng rng(4402);
  for (int trial = 0; trial < 25; ++trial) {
    int n = rng.uniform_int(6, 11);
    std::vector<int> d;
    Instance inst = knapsack_style_instance(rng, n, 0);
    int total = 0;
    for (const Supplier& s : inst.suppliers) {
      d.push_back(static_cast<int>(s.workload));
      total += static_cast<int>(s.workload);
    }
    int q = std::max(5, (total * rng.uniform_int(30, 80)) / 100);
    inst.Q = q;
    Problem P = Problem::build(inst);
    UbModel M = build_model(P);
    UbSolveResult res = solve_exact_small(P, M);
    REQUIRE(res.optimal);
    REQUIRE(res.value == res.bound);
    REQUIRE_THAT(res.value,
                 Catch::Matchers::WithinAbs(knapsack_dp(d, q), 1e-9));
  }
}

TEST_CASE("capacity below the smallest workload forces a zero bound", "[ub]") {
  Rng rng(4403);
  Instance inst = knapsack_style_instance(rng, 8, 0);
  inst.Q = 0.5;  // every workload is >= 5
  Problem P = Problem::build(inst);
  UbModel M = build_model(P);
  UbSolveResult res = solve_exact_small(P, M);
  REQUIRE(res.optimal);
  REQUIRE(res.value == 0.0);
  REQUIRE(res.bound == 0.0);
}

TEST_CASE("branch and bound matches brute force on tiny models", "[ub]") {
  Rng rng(4404);
  TinyGenOptions opt;
  opt.n_min = 3;
  opt.n_max = 5;
  opt.m_max = 2;
  opt.w_max = 2;
  for (int trial = 0; trial < 40; ++trial) {
    Instance inst = random_instance(rng, opt);
    Problem P = Problem::build(inst);
    UbOptions mopt;
    mopt.period_budget = trial % 2 == 1;  // cover both model shapes
    UbModel M = build_model(P, mopt);
    UbSolveResult res = solve_exact_small(P, M);
    REQUIRE(res.optimal);
    double brute = brute_force_model(M);
    REQUIRE_THAT(res.value, Catch::Matchers::WithinAbs(brute, 1e-9));
    REQUIRE_THAT(res.bound, Catch::Matchers::WithinAbs(brute, 1e-9));
  }
}

TEST_CASE("bound dominates exact optima and heuristic solutions", "[ub]") {
  Rng rng(4405);
  TinyGenOptions opt;
  opt.n_min = 4;
  opt.n_max = 6;
  opt.m_max = 2;
  opt.w_max = 2;
  SearchParams prm;
  prm.n_init = 10;
  prm.max_perturbation = 2;
  int tight = 0;
  for (int trial = 0; trial < 30; ++trial) {
    // Every third trial is capacity-bound with slack time windows; there the
    // relaxation collapses to the knapsack the schedule actually faces, so
    // the bound should be attained.
    Instance inst = trial % 3 == 2 ? knapsack_style_instance(rng, 6, 45)
                                   : random_instance(rng, opt);
    Problem P = Problem::build(inst);
    UbModel M = build_model(P);
    UbSolveResult res = solve_exact_small(P, M);
    REQUIRE(res.optimal);

    UbOptions strong_opt;
    strong_opt.period_budget = true;
    UbModel Ms = build_model(P, strong_opt);
    UbSolveResult strong = solve_exact_small(P, Ms);
    REQUIRE(strong.optimal);
    REQUIRE(strong.bound <= res.bound + 1e-9);  // extra rows never loosen

    TransitFn transit = oracle_transit_fn(P.inst);
    double opt_p = exhaustive_optimum(P.inst, transit);
    REQUIRE(res.bound >= opt_p - 1e-9);
    REQUIRE(strong.bound >= opt_p - 1e-9);
    if (res.bound <= opt_p + 1e-9) ++tight;

    SearchResult sr = tabu_search(P, prm, 77 + static_cast<std::uint64_t>(trial));
    REQUIRE(res.bound >= sr.best.fit.P - 1e-9);
    REQUIRE_FALSE(check_assignment(P, M, sr.best).has_value());
    REQUIRE_FALSE(check_assignment(P, Ms, sr.best).has_value());

    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      Rng r2(seed);
      Solution s = initial_solution(P, prm, r2);
      REQUIRE_FALSE(check_assignment(P, M, s).has_value());
      s = local_search(P, prm, std::move(s), prm.tenure);
      REQUIRE_FALSE(check_assignment(P, M, s).has_value());
      REQUIRE_FALSE(check_assignment(P, Ms, s).has_value());
    }
  }
  CHECK(tight >= 5);  // the relaxation is not vacuously loose
}

TEST_CASE("bound never shrinks when inspectors are added", "[ub]") {
  Rng rng(4407);
  TinyGenOptions opt;
  opt.n_min = 4;
  opt.n_max = 7;
  opt.m_max = 2;
  opt.w_max = 2;
  for (int trial = 0; trial < 20; ++trial) {
    Instance inst = random_instance(rng, opt);
    Instance more = inst;
    more.m += 2;
    Problem P1 = Problem::build(std::move(inst));
    Problem P2 = Problem::build(std::move(more));
    UbSolveResult a = solve_exact_small(P1, build_model(P1));
    UbSolveResult b = solve_exact_small(P2, build_model(P2));
    REQUIRE(a.optimal);
    REQUIRE(b.optimal);
    REQUIRE(b.bound >= a.bound - 1e-9);
  }
}

TEST_CASE("exact solve refuses oversized models, bound_model does not",
          "[ub]") {
  Instance inst;
  inst.name = "big";
  inst.source = "synthetic";
  inst.m = 8;
  inst.Q = 1000.0;
  inst.grid = {9, 900.0};
  for (int i = 1; i <= 70; ++i) {
    Supplier s;
    s.id = i;
    s.x = static_cast<double>(i % 10);
    s.y = static_cast<double>(i / 10);
    s.workload = 10.0;
    s.service = 1.0;
    s.e = 0.0;
    s.l = inst.grid.horizon;
    inst.suppliers.push_back(s);
  }
  build_travel(inst);
  Problem P = Problem::build(std::move(inst));
  UbModel M = build_model(P);
  REQUIRE(M.vars() == 70 * 8 * 9);
  REQUIRE(M.vars() > kExactModelVarLimit);
  REQUIRE_THROWS_AS(solve_exact_small(P, M), std::invalid_argument);
  UbSolveResult res = bound_model(P, M, 20'000);
  REQUIRE(res.bound >= res.value);
  REQUIRE(res.value >= 0.0);
}

TEST_CASE("emitted model text is deterministic and complete", "[ub]") {
  Rng rng(4406);
  TinyGenOptions opt;
  opt.n_min = 6;
  opt.n_max = 8;
  opt.m_max = 3;
  opt.w_max = 3;
  Instance inst = random_instance(rng, opt);
  Problem P1 = Problem::build(inst);
  Problem P2 = Problem::build(inst);
  UbModel M1 = build_model(P1);
  UbModel M2 = build_model(P2);
  std::string lp1 = emit_lp(M1, inst.name);
  std::string lp2 = emit_lp(M2, inst.name);
  REQUIRE(lp1 == lp2);

  REQUIRE(lp1.starts_with("\\ "));
  REQUIRE(lp1.find("Maximize\n") != std::string::npos);
  REQUIRE(lp1.find("Subject To\n") != std::string::npos);
  REQUIRE(lp1.find("Binaries\n") != std::string::npos);
  REQUIRE(lp1.ends_with("End\n"));

  // Every materialised row appears exactly once in the text.
  int expected = M1.rows_assign + M1.rows_period + M1.rows_conflict +
                 M1.rows_capacity + M1.rows_return + M1.rows_budget;
  REQUIRE(static_cast<int>(M1.rows.size()) == expected);
  for (const UbRow& row : M1.rows) {
    auto pos = lp1.find(" " + row.name + ":");
    REQUIRE(pos != std::string::npos);
    REQUIRE(lp1.find(" " + row.name + ":", pos + 1) == std::string::npos);
  }
}
