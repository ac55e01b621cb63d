#include <catch2/catch_amalgamated.hpp>

#include "mpisp/common.hpp"
#include "mpisp/timewin.hpp"
#include "support/tinygen.hpp"

using namespace mpisp;
using mpisp::testing::random_instance;

namespace {

Instance one_supplier(double e, double l, double service, int w, double horizon) {
  Instance inst;
  inst.name = "tw";
  inst.m = 1;
  inst.Q = kInf;
  inst.grid = PeriodGrid{w, horizon};
  inst.suppliers = {{1, 1.0, 0.0, 5.0, service, e, l}};
  build_travel(inst);
  return inst;
}

}  // namespace

TEST_CASE("window tightening moves endpoints to fitting starts", "[timewin]") {
  // Five periods of length 20.
  SECTION("earliest endpoint in a dead zone jumps to the next opening") {
    EffectiveWindows w = tighten_windows(one_supplier(15, 80, 10, 5, 100));
    CHECK(w.e[1] == Catch::Approx(20.0));
    CHECK(w.l[1] == Catch::Approx(80.0));
  }
  SECTION("latest endpoint in a dead zone drops to the last fitting start") {
    EffectiveWindows w = tighten_windows(one_supplier(0, 15, 10, 5, 100));
    CHECK(w.e[1] == Catch::Approx(0.0));
    CHECK(w.l[1] == Catch::Approx(10.0));
  }
  SECTION("a boundary endpoint counts as the later period's opening") {
    EffectiveWindows w = tighten_windows(one_supplier(0, 20, 10, 5, 100));
    CHECK(w.l[1] == Catch::Approx(20.0));  // full period ahead, untouched
    EffectiveWindows w2 = tighten_windows(one_supplier(20, 95, 10, 5, 100));
    CHECK(w2.e[1] == Catch::Approx(20.0));
  }
  SECTION("zero service never tightens") {
    EffectiveWindows w = tighten_windows(one_supplier(15, 19, 0, 5, 100));
    CHECK(w.e[1] == Catch::Approx(15.0));
    CHECK(w.l[1] == Catch::Approx(19.0));
  }
  SECTION("service longer than a period inverts the window") {
    EffectiveWindows w = tighten_windows(one_supplier(0, 100, 25, 5, 100));
    CHECK(w.e[1] > w.l[1]);
  }
}

// The solver checks feasibility on tightened windows with plain interval
// arithmetic (start = max(arrival, e'), accept iff start <= l'), while the
// physical model pushes a non-fitting start to the next period opening and
// checks the original window on the actual start. These must agree, and
// when both accept, the actual service start and departure must be equal.
TEST_CASE("tightened-window schedule equals push-to-opening semantics",
          "[timewin][property]") {
  Rng rng(20250814);
  int checked = 0;
  for (int iter = 0; iter < 2000; ++iter) {
    testing::TinyGenOptions opt;
    opt.n_min = 1;
    opt.n_max = 6;
    Instance inst = random_instance(rng, opt);
    EffectiveWindows eff = tighten_windows(inst);
    const PeriodGrid& g = inst.grid;
    double T = g.length();

    for (const Supplier& s : inst.suppliers) {
      for (int k = 0; k < 8; ++k) {
        double ea = rng.uniform(0.0, g.horizon * 1.1);

        // Physical semantics on the original window.
        double start = std::max(ea, s.e);
        double resid = g.ceil_of(start) - start;
        double actual = (resid + kTimeEps >= s.service) ? start : g.ceil_of(start);
        bool phys_ok = s.service <= T + kTimeEps && actual <= s.l + kTimeEps &&
                       actual + s.service <= g.horizon + kTimeEps;

        // Solver semantics on the tightened window.
        double sa = std::max(ea, eff.e[s.id]);
        bool solver_ok = sa <= eff.l[s.id] + kTimeEps;

        INFO("e=" << s.e << " l=" << s.l << " s=" << s.service << " ea=" << ea
                  << " w=" << g.w << " H=" << g.horizon);
        REQUIRE(solver_ok == phys_ok);
        if (solver_ok) {
          double resid2 = g.ceil_of(sa) - sa;
          double dep_solver =
              (resid2 + kTimeEps >= s.service ? sa : g.ceil_of(sa)) + s.service;
          double dep_phys = actual + s.service;
          REQUIRE(dep_solver == Catch::Approx(dep_phys).margin(1e-9));
          ++checked;
        }
      }
    }
  }
  CHECK(checked > 5000);  // the accept branch must be well exercised
}
