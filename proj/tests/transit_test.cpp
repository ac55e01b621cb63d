#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "mpisp/transit.hpp"
#include "support/oracles.hpp"
#include "support/tinygen.hpp"

using namespace mpisp;
using namespace mpisp::testing;

namespace {

// Depot at 0, two suppliers on a line: t01 = 8, t12 = 4, t02 = 12.
// Four periods of length 10 over horizon 40.
Instance line_instance() {
  Instance inst;
  inst.name = "line";
  inst.m = 1;
  inst.Q = kInf;
  inst.grid = PeriodGrid{4, 40.0};
  inst.depot_x = 0;
  inst.depot_y = 0;
  inst.suppliers = {
      {1, 8.0, 0.0, 1.0, 2.0, 0.0, 40.0},
      {2, 12.0, 0.0, 1.0, 2.0, 0.0, 40.0},
  };
  build_travel(inst);
  return inst;
}

}  // namespace

TEST_CASE("elapsed ceiling on the uniform extension", "[transit]") {
  CHECK(elapsed_ceil(0.0, 10.0) == 10.0);
  CHECK(elapsed_ceil(1e-12, 10.0) == 10.0);
  CHECK(elapsed_ceil(10.0, 10.0) == 10.0);
  CHECK(elapsed_ceil(10.5, 10.0) == 20.0);
  CHECK(elapsed_ceil(55.0, 10.0) == 60.0);  // beyond any horizon: keeps going
}

TEST_CASE("transit uses relays when the direct leg never fits a period",
          "[transit]") {
  Instance inst = line_instance();
  TransitTables tt = TransitTables::compute(inst);

  // Direct 0->2 takes 12 > period 10: must relay through supplier 1.
  CHECK(tt.base(0, 2) == Catch::Approx(14.0));  // 10 (wait at 1) + 4
  CHECK(tt.base(0, 1) == Catch::Approx(8.0));
  CHECK(tt.base(1, 2) == Catch::Approx(4.0));
  // Not symmetric: leaving 2 the relay is reached after 4, the rest of the
  // period is spent waiting, and the long leg still remains.
  CHECK(tt.base(2, 0) == Catch::Approx(18.0));

  // Departing at 0: reach 1 within the first period, wait, arrive at 14.
  CHECK(tt.query(0, 2, 0.0) == Catch::Approx(14.0));
  // Departing at 3: 7 left, cannot even reach the relay; a full period is
  // lost waiting at the depot, then the relay chain runs from t = 10.
  CHECK(tt.query(0, 2, 3.0) == Catch::Approx(21.0));
  // Departing exactly on a boundary falls through to the base table.
  CHECK(tt.query(0, 2, 10.0) == Catch::Approx(14.0));
  // Self transit is free.
  CHECK(tt.query(2, 2, 17.3) == 0.0);
}

TEST_CASE("base tables match the layered-reachability oracle",
          "[transit][property]") {
  Rng rng(101);
  for (int iter = 0; iter < 60; ++iter) {
    Instance inst = random_instance(rng);
    TransitTables tt = TransitTables::compute(inst);
    int nv = inst.n() + 1;
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < nv; ++j) {
        double want = oracle_base(inst, i, j);
        INFO("iter " << iter << " i=" << i << " j=" << j << " w=" << inst.grid.w
                     << " H=" << inst.grid.horizon);
        if (want >= kInf) {
          REQUIRE(tt.base(i, j) >= kInf);
        } else {
          REQUIRE(tt.base(i, j) == Catch::Approx(want).margin(1e-9));
        }
      }
  }
}

TEST_CASE("queries match the oracle and are FIFO", "[transit][property]") {
  Rng rng(202);
  for (int iter = 0; iter < 60; ++iter) {
    Instance inst = random_instance(rng);
    TransitTables tt = TransitTables::compute(inst);
    int nv = inst.n() + 1;
    for (int k = 0; k < 300; ++k) {
      int i = rng.uniform_int(0, nv - 1);
      int j = rng.uniform_int(0, nv - 1);
      double dt = rng.uniform(0.0, inst.horizon() * 1.5);
      double got = tt.query(i, j, dt);
      double want = oracle_transit(inst, i, j, dt);
      INFO("iter " << iter << " i=" << i << " j=" << j << " dt=" << dt);
      if (want >= kInf) {
        REQUIRE(got >= kInf);
      } else {
        REQUIRE(got == Catch::Approx(want).margin(1e-9));
        REQUIRE(got >= inst.travel[i][j] - 1e-9);  // direct leg lower-bounds
      }

      // FIFO: departing later never arrives earlier.
      double dt2 = dt + rng.uniform(0.0, inst.horizon() * 0.5);
      double got2 = tt.query(i, j, dt2);
      if (got < kInf && got2 < kInf) {
        REQUIRE(dt + got <= dt2 + got2 + 1e-9);
      }
    }
  }
}

TEST_CASE("earliest departure handles fit, push and overflow", "[transit]") {
  Instance inst = line_instance();  // T = 10, horizon 40
  TransitTables tt = TransitTables::compute(inst);

  CHECK(tt.earliest_departure(2.0, 5.0) == Catch::Approx(7.0));    // fits
  CHECK(tt.earliest_departure(7.0, 5.0) == Catch::Approx(15.0));   // pushed
  CHECK(tt.earliest_departure(10.0, 5.0) == Catch::Approx(15.0));  // boundary
  CHECK(tt.earliest_departure(4.0, 0.0) == Catch::Approx(4.0));    // no service
  CHECK(tt.earliest_departure(38.0, 5.0) >= kInf);                 // overflow
  CHECK(tt.earliest_departure(2.0, 11.0) >= kInf);  // longer than a period
  CHECK(tt.earliest_departure(41.0, 0.0) >= kInf);  // starts past horizon

  SECTION("monotone in the start time") {
    Rng rng(7);
    for (int k = 0; k < 2000; ++k) {
      double s = rng.uniform(0.0, 12.0);
      double a = rng.uniform(0.0, 40.0);
      double b = a + rng.uniform(0.0, 40.0 - a);
      double da = tt.earliest_departure(a, s);
      double db = tt.earliest_departure(b, s);
      if (da < kInf && db < kInf) REQUIRE(da <= db + 1e-9);
    }
  }
}

TEST_CASE("latest start is the exact inverse of earliest departure",
          "[transit][property]") {
  Rng rng(303);
  for (int iter = 0; iter < 40; ++iter) {
    Instance inst = random_instance(rng);
    TransitTables tt = TransitTables::compute(inst);
    double H = inst.horizon();
    for (int k = 0; k < 60; ++k) {
      double s = rng.uniform(0.0, inst.grid.length() * 1.2);
      double deadline = rng.uniform(0.0, H * 1.2);
      double eff = std::min(deadline, H);
      double ls = tt.latest_start(s, deadline);
      INFO("s=" << s << " deadline=" << deadline << " w=" << inst.grid.w
                << " H=" << H << " ls=" << ls);
      if (ls > -kInf) {
        double dep = tt.earliest_departure(ls, s);
        REQUIRE(dep < kInf);
        REQUIRE(dep <= eff + 1e-9);
        // Nothing later works.
        double probe = tt.earliest_departure(ls + 1e-6, s);
        REQUIRE((probe >= kInf || probe > eff + 1e-9));
        for (int r = 0; r < 10; ++r) {
          double tau = ls + 1e-6 + rng.uniform(0.0, std::max(H - ls, 0.1));
          double d2 = tt.earliest_departure(tau, s);
          REQUIRE((d2 >= kInf || d2 > eff + 1e-9));
        }
      } else {
        for (int r = 0; r < 20; ++r) {
          double tau = rng.uniform(0.0, H);
          double d2 = tt.earliest_departure(tau, s);
          REQUIRE((d2 >= kInf || d2 > eff + 1e-9));
        }
      }
    }
  }
}

TEST_CASE("latest departure is the exact inverse of arrival",
          "[transit][property]") {
  Rng rng(404);
  for (int iter = 0; iter < 40; ++iter) {
    Instance inst = random_instance(rng);
    TransitTables tt = TransitTables::compute(inst);
    int nv = inst.n() + 1;
    double H = inst.horizon();
    for (int k = 0; k < 40; ++k) {
      int i = rng.uniform_int(0, nv - 1);
      int j = rng.uniform_int(0, nv - 1);
      double deadline = rng.uniform(0.0, H * 1.2);
      double dep = tt.latest_departure(i, j, deadline);
      INFO("i=" << i << " j=" << j << " deadline=" << deadline
                << " w=" << inst.grid.w << " dep=" << dep);
      if (dep > -kInf) {
        REQUIRE(dep <= H + 1e-9);
        double arr = dep + oracle_transit(inst, i, j, dep);
        REQUIRE(arr <= deadline + 1e-6);
        for (int r = 0; r < 12; ++r) {
          double dt = dep + 1e-6 + rng.uniform(0.0, std::max(H - dep, 0.1));
          if (dt > H) continue;
          double a2 = dt + oracle_transit(inst, i, j, dt);
          REQUIRE(a2 > deadline + 1e-9);
        }
      } else {
        for (int r = 0; r < 20; ++r) {
          double dt = rng.uniform(0.0, H);
          double a2 = dt + oracle_transit(inst, i, j, dt);
          REQUIRE(a2 > deadline + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("transit tables serialize and reload bit-exactly", "[transit]") {
  Rng rng(505);
  Instance inst = random_instance(rng);
  TransitTables tt = TransitTables::compute(inst);
  std::ostringstream out;
  tt.dump(out, 0xfeedface);
  std::istringstream in(out.str());
  auto back = TransitTables::load(in, 0xfeedface);
  REQUIRE(back.has_value());
  int nv = inst.n() + 1;
  for (int i = 0; i < nv; ++i)
    for (int j = 0; j < nv; ++j) REQUIRE(back->base(i, j) == tt.base(i, j));
  for (int k = 0; k < 200; ++k) {
    int i = rng.uniform_int(0, nv - 1);
    int j = rng.uniform_int(0, nv - 1);
    double dt = rng.uniform(0.0, inst.horizon());
    REQUIRE(back->query(i, j, dt) == tt.query(i, j, dt));
  }
  std::istringstream in2(out.str());
  CHECK_FALSE(TransitTables::load(in2, 0xdeadbeef).has_value());
}
