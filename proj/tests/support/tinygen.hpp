#pragma once

// Random small-instance generator for property tests. Instances are always
// metric (Euclidean, unrounded travel) and pass validate().

#include <algorithm>
#include <cmath>

#include "mpisp/common.hpp"
#include "mpisp/instance.hpp"

namespace mpisp::testing {

struct TinyGenOptions {
  int n_min = 1, n_max = 10;
  int m_min = 1, m_max = 3;
  int w_min = 1, w_max = 4;
  double horizon_min = 60.0, horizon_max = 240.0;
  bool allow_inf_capacity = true;
  bool allow_oversize_service = true;  // occasionally service > period length
};

inline Instance random_instance(Rng& rng, const TinyGenOptions& opt = {}) {
  Instance inst;
  int n = rng.uniform_int(opt.n_min, opt.n_max);
  inst.m = rng.uniform_int(opt.m_min, opt.m_max);
  int w = rng.uniform_int(opt.w_min, opt.w_max);
  double horizon = rng.uniform(opt.horizon_min, opt.horizon_max);
  inst.grid = PeriodGrid{w, horizon};
  double period = inst.grid.length();

  // Spread controls how travel times compare with the period length.
  double spread = rng.uniform(0.3, 1.2) * period;
  inst.depot_x = rng.uniform(0.0, spread);
  inst.depot_y = rng.uniform(0.0, spread);

  bool tight_capacity = rng.uniform() < 0.5 || !opt.allow_inf_capacity;
  inst.Q = tight_capacity ? rng.uniform(20.0, 80.0) : kInf;

  for (int i = 1; i <= n; ++i) {
    Supplier s;
    s.id = i;
    s.x = rng.uniform(0.0, spread);
    s.y = rng.uniform(0.0, spread);
    s.workload = static_cast<double>(rng.uniform_int(1, 20));
    double smax = std::min(period, 30.0);
    s.service = rng.uniform(0.5, std::max(smax, 0.6));
    if (opt.allow_oversize_service && rng.uniform() < 0.05)
      s.service = period * rng.uniform(1.01, 1.5);
    s.e = rng.uniform(0.0, horizon);
    s.l = s.e + rng.uniform(0.0, horizon - s.e);
    inst.suppliers.push_back(s);
  }
  inst.name = "tiny";
  inst.source = "tinygen";
  inst.rounding = TravelRounding::kNone;
  build_travel(inst);
  return inst;
}

}  // namespace mpisp::testing
