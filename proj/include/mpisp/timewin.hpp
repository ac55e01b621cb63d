#pragma once

#include <vector>

#include "mpisp/instance.hpp"

namespace mpisp {

/// Effective service-start windows per vertex (0 = depot, untouched).
struct EffectiveWindows {
  std::vector<double> e, l;  // size n+1
};

/// Shrinks each supplier window to starts whose service fits inside one
/// period: the earliest endpoint moves up to the next opening when the
/// remainder of its period is too short, the latest endpoint moves down to
/// the last fitting start of its period. Period membership is left-closed
/// ([a_p, b_p)), so a start exactly on a boundary counts as the later
/// period's opening and is never tightened away. A window may come out
/// inverted (e > l): the supplier is then unservable.
inline EffectiveWindows tighten_windows(const Instance& inst) {
  const PeriodGrid& g = inst.grid;
  EffectiveWindows win;
  win.e.assign(inst.n() + 1, 0.0);
  win.l.assign(inst.n() + 1, g.horizon);
  for (const Supplier& s : inst.suppliers) {
    if (s.service > g.length() + kTimeEps) {
      // No start ever fits; endpoint shifting alone cannot express that.
      win.e[s.id] = g.horizon;
      win.l[s.id] = -1.0;
      continue;
    }
    double close_e = g.close(g.period_start(s.e));
    double close_l = g.close(g.period_start(s.l));
    bool e_fits = close_e - s.e + kTimeEps >= s.service;
    bool l_fits = close_l - s.l + kTimeEps >= s.service;
    win.e[s.id] = e_fits ? s.e : close_e;
    win.l[s.id] = l_fits ? s.l : close_l - s.service;
  }
  return win;
}

}  // namespace mpisp
