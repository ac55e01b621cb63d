#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mpisp/common.hpp"

namespace mpisp {

/// Uniform working-period grid in zero-downtime normal form: w contiguous
/// periods of equal length covering [0, horizon], i.e. a_p = horizon*(p-1)/w,
/// b_p = horizon*p/w. Boundaries are derived (never stored) so that
/// b_w == horizon exactly and no drift accumulates.
struct PeriodGrid {
  int w = 1;
  double horizon = 0;

  double length() const { return horizon / w; }
  double open(int p) const { return horizon * (p - 1) / w; }   // a_p
  double close(int p) const { return horizon * p / w; }        // b_p

  /// Period whose *closing* bounds dt from above under the ceiling
  /// convention: dt in (a_p, b_p] -> p, and dt == 0 -> 1. So an interior
  /// boundary belongs to the earlier period (zero residual there). Instants
  /// within kTimeEps of a boundary snap to it.
  int period_ceil(double dt) const {
    if (dt <= kTimeEps) return 1;
    int p = static_cast<int>(std::ceil(dt * w / horizon));
    p = std::clamp(p, 1, w);
    while (p < w && dt > close(p) + kTimeEps) ++p;
    while (p > 1 && dt <= close(p - 1) + kTimeEps) --p;
    return p;
  }

  /// Period containing a *service start*: dt in [a_p, b_p) -> p. A start at
  /// an interior boundary runs in the later period (a full period lies ahead
  /// of it), unlike period_ceil. dt >= horizon maps to w.
  int period_start(double dt) const {
    if (dt >= horizon - kTimeEps) return w;
    int p = static_cast<int>(std::floor(dt * w / horizon)) + 1;
    p = std::clamp(p, 1, w);
    while (p > 1 && dt < open(p) - kTimeEps) --p;
    while (p < w && dt >= close(p) - kTimeEps) ++p;
    return p;
  }

  /// ceil(dt): closing boundary of the period containing dt, with
  /// ceil(0) = b_1 and ceil(a_p) = a_p for p >= 2.
  double ceil_of(double dt) const { return close(period_ceil(dt)); }
};

struct Supplier {
  int id = 0;  // vertex id, 1-based; 0 is the depot
  double x = 0, y = 0;
  double workload = 0;  // demand served when visited
  double service = 0;   // uninterruptible service duration
  double e = 0, l = 0;  // window on the service start
};

enum class TravelRounding { kNone, kHundredth };

inline const char* to_string(TravelRounding r) {
  return r == TravelRounding::kNone ? "none" : "hundredth";
}

/// One MPISP instance in normal form. Vertex 0 is the depot; suppliers are
/// vertices 1..n in id order. The travel matrix is symmetric and satisfies
/// the triangle inequality (validate() enforces both).
struct Instance {
  std::string name;
  std::string source;  // originating data file, or "synthetic"
  int m = 1;           // inspectors
  double Q = 0;        // per-inspector capacity; kInf in TOPTW mode
  PeriodGrid grid;
  double depot_x = 0, depot_y = 0;
  std::vector<Supplier> suppliers;
  std::vector<std::vector<double>> travel;  // (n+1) x (n+1)
  TravelRounding rounding = TravelRounding::kNone;

  int n() const { return static_cast<int>(suppliers.size()); }
  double horizon() const { return grid.horizon; }
  const Supplier& supplier(int vertex) const { return suppliers[vertex - 1]; }
  double service_of(int vertex) const {
    return vertex == 0 ? 0.0 : supplier(vertex).service;
  }
  double workload_of(int vertex) const {
    return vertex == 0 ? 0.0 : supplier(vertex).workload;
  }
};

inline double euclid(double ax, double ay, double bx, double by) {
  return std::hypot(ax - bx, ay - by);
}

/// Builds the travel matrix from coordinates. kHundredth rounds each entry
/// to the nearest 0.01 (a common TOPTW convention); kNone keeps full
/// doubles.
inline void build_travel(Instance& inst) {
  int n = inst.n();
  std::vector<std::pair<double, double>> pts(n + 1);
  pts[0] = {inst.depot_x, inst.depot_y};
  for (const auto& s : inst.suppliers) pts[s.id] = {s.x, s.y};
  inst.travel.assign(n + 1, std::vector<double>(n + 1, 0.0));
  for (int i = 0; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      double d = euclid(pts[i].first, pts[i].second, pts[j].first, pts[j].second);
      if (inst.rounding == TravelRounding::kHundredth)
        d = std::round(d * 100.0) / 100.0;
      inst.travel[i][j] = inst.travel[j][i] = d;
    }
}

/// Structural checks. Returns every violation found (empty = valid).
inline std::vector<std::string> validate(const Instance& inst) {
  std::vector<std::string> bad;
  auto fail = [&](std::string msg) { bad.push_back(std::move(msg)); };
  char buf[160];

  if (inst.grid.w < 1) fail("grid: w must be >= 1");
  if (!(inst.grid.horizon > 0)) fail("grid: horizon must be positive");
  if (inst.m < 1) fail("m must be >= 1");
  if (!(inst.Q >= 0)) fail("Q must be >= 0");

  int n = inst.n();
  for (int i = 0; i < n; ++i) {
    const Supplier& s = inst.suppliers[i];
    if (s.id != i + 1) {
      std::snprintf(buf, sizeof buf, "supplier %d: id %d out of order", i, s.id);
      fail(buf);
    }
    if (s.workload < 0) {
      std::snprintf(buf, sizeof buf, "supplier %d: negative workload", s.id);
      fail(buf);
    }
    if (s.service < 0) {
      std::snprintf(buf, sizeof buf, "supplier %d: negative service", s.id);
      fail(buf);
    }
    if (s.e > s.l) {
      std::snprintf(buf, sizeof buf, "supplier %d: window [%g, %g] inverted",
                    s.id, s.e, s.l);
      fail(buf);
    }
    if (s.e < 0 || s.l > inst.grid.horizon + kTimeEps) {
      std::snprintf(buf, sizeof buf,
                    "supplier %d: window [%g, %g] outside [0, %g]", s.id, s.e,
                    s.l, inst.grid.horizon);
      fail(buf);
    }
  }

  if (static_cast<int>(inst.travel.size()) != n + 1) {
    fail("travel matrix size mismatch");
    return bad;  // shape is broken; element checks would be noise
  }
  // Rounding each leg to 0.01 can break the exact triangle inequality by up
  // to 2 * 0.005; allow that much slack in kHundredth mode.
  double slack =
      (inst.rounding == TravelRounding::kHundredth ? 0.02 : 0.0) + kTimeEps;
  for (int i = 0; i <= n; ++i) {
    if (static_cast<int>(inst.travel[i].size()) != n + 1) {
      fail("travel matrix row size mismatch");
      return bad;
    }
    if (inst.travel[i][i] != 0) {
      std::snprintf(buf, sizeof buf, "travel[%d][%d] must be 0", i, i);
      fail(buf);
    }
  }
  for (int i = 0; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      if (inst.travel[i][j] < 0) {
        std::snprintf(buf, sizeof buf, "travel[%d][%d] negative", i, j);
        fail(buf);
      }
      if (inst.travel[i][j] != inst.travel[j][i]) {
        std::snprintf(buf, sizeof buf, "travel[%d][%d] asymmetric", i, j);
        fail(buf);
      }
    }
  for (int i = 0; i <= n && bad.empty(); ++i)
    for (int j = 0; j <= n; ++j)
      for (int k = 0; k <= n; ++k)
        if (inst.travel[i][j] > inst.travel[i][k] + inst.travel[k][j] + slack) {
          std::snprintf(buf, sizeof buf,
                        "triangle inequality violated at (%d,%d,%d)", i, j, k);
          fail(buf);
          k = j = n + 1;  // one report is enough
        }
  return bad;
}

/// A raw working period [open, close] on the original (downtime-bearing)
/// timeline.
struct RawPeriod {
  double open = 0, close = 0;
};

struct DowntimeResult {
  std::vector<std::pair<double, double>> windows;  // shifted into normal form
  std::vector<int> degenerate;  // indices of windows collapsed inside a gap
  double horizon = 0;           // b_w after compression
};

/// Removes inter-period downtime: every instant is shifted left by the total
/// gap time preceding it, so the periods become contiguous equal slices of
/// [0, horizon]. A window endpoint falling inside a gap clamps to the
/// compressed boundary; windows collapsing to a point inside one gap are
/// flagged (the supplier can only start service exactly at a period edge).
inline DowntimeResult transform_downtime(
    const std::vector<RawPeriod>& periods,
    const std::vector<std::pair<double, double>>& windows) {
  if (periods.empty()) throw std::invalid_argument("no periods");
  double T = periods[0].close - periods[0].open;
  for (std::size_t p = 0; p < periods.size(); ++p) {
    const auto& pp = periods[p];
    if (!(pp.close > pp.open))
      throw std::invalid_argument("period with nonpositive length");
    if (std::abs((pp.close - pp.open) - T) > kTimeEps)
      throw std::invalid_argument("periods must have equal length");
    if (p > 0 && pp.open < periods[p - 1].close - kTimeEps)
      throw std::invalid_argument("periods must be ordered and disjoint");
  }

  // shift(t) maps an original instant onto the compressed timeline.
  auto shift = [&](double t) {
    double gap = 0;
    for (std::size_t p = 0; p + 1 < periods.size(); ++p) {
      if (t <= periods[p].close) break;
      double g = periods[p + 1].open - periods[p].close;
      double into = std::min(t, periods[p + 1].open) - periods[p].close;
      gap += std::min(g, std::max(0.0, into));
    }
    return t - gap;
  };

  DowntimeResult out;
  out.horizon = shift(periods.back().close) - shift(periods[0].open);
  double origin = shift(periods[0].open);
  out.windows.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    double e = shift(std::max(windows[i].first, periods[0].open)) - origin;
    double l = shift(std::min(windows[i].second, periods.back().close)) - origin;
    e = std::clamp(e, 0.0, out.horizon);
    l = std::clamp(l, 0.0, out.horizon);
    if (l - e <= kTimeEps && windows[i].second - windows[i].first > kTimeEps)
      out.degenerate.push_back(static_cast<int>(i));
    out.windows.emplace_back(e, l);
  }
  return out;
}

}  // namespace mpisp
