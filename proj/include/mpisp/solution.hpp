#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mpisp/common.hpp"
#include "mpisp/instance.hpp"
#include "mpisp/timewin.hpp"
#include "mpisp/transit.hpp"

namespace mpisp {

/// Solver-side view of an instance: transit tables plus service windows
/// tightened so that plain interval arithmetic on starts is exact.
struct Problem {
  Instance inst;
  TransitTables tt;
  EffectiveWindows win;

  static Problem build(Instance instance) {
    Problem p;
    p.tt = TransitTables::compute(instance);
    p.win = tighten_windows(instance);
    p.inst = std::move(instance);
    return p;
  }

  int n() const { return inst.n(); }
  int m() const { return inst.m; }
  double q() const { return inst.Q; }
  double horizon() const { return inst.grid.horizon; }
  const PeriodGrid& grid() const { return inst.grid; }
  double e(int v) const { return win.e[v]; }
  double l(int v) const { return win.l[v]; }
  double service(int v) const { return v == 0 ? 0.0 : inst.supplier(v).service; }
  double workload(int v) const { return v == 0 ? 0.0 : inst.supplier(v).workload; }
};

/// One inspector's route with cached schedule state. All cached fields are
/// derived from seq; operators must re-run the two passes after edits.
struct Route {
  std::vector<int> seq;
  std::vector<double> ea, sa, ed;  // earliest arrival / service start / departure
  std::vector<double> la;          // latest arrival keeping the suffix feasible
  double ea_end = 0.0;             // earliest arrival back at the depot
  double la0 = 0.0;                // latest departure from the depot
  double wl = 0.0;
  std::vector<double> wl_pre;      // wl_pre[k] = workload of the first k visits
  double mft = 0.0;                // max free time over all positions

  int size() const { return static_cast<int>(seq.size()); }
  bool empty() const { return seq.empty(); }
};

/// Earliest departure from v when approached from `prev` leaving at ed_prev;
/// nullopt when the visit violates v's effective window or the horizon.
inline std::optional<double> extend(const Problem& P, int prev, double ed_prev,
                                    int v, double* arrival = nullptr,
                                    double* start = nullptr) {
  double leg = P.tt.query(prev, v, ed_prev);
  if (leg >= kInf) return std::nullopt;
  double ea = ed_prev + leg;
  if (arrival) *arrival = ea;
  double sa = std::max(ea, P.e(v));
  if (start) *start = sa;
  if (sa > P.l(v) + kTimeEps) return std::nullopt;
  double ed = P.tt.earliest_departure(sa, P.service(v));
  if (ed >= kInf) return std::nullopt;
  return ed;
}

/// Forward pass: earliest schedule from the depot at time 0. Returns false
/// (leaving caches undefined) when any window, the horizon, the depot
/// deadline, or capacity is violated.
inline bool forward_schedule(const Problem& P, Route& r) {
  int L = r.size();
  r.ea.assign(L, 0.0);
  r.sa.assign(L, 0.0);
  r.ed.assign(L, 0.0);
  r.wl_pre.assign(L + 1, 0.0);
  double ed = 0.0;
  int prev = 0;
  for (int i = 0; i < L; ++i) {
    int v = r.seq[i];
    auto next = extend(P, prev, ed, v, &r.ea[i], &r.sa[i]);
    if (!next) return false;
    ed = r.ed[i] = *next;
    r.wl_pre[i + 1] = r.wl_pre[i] + P.workload(v);
    prev = v;
  }
  r.wl = r.wl_pre[L];
  if (r.wl > P.q() + kTimeEps) return false;
  double leg = P.tt.query(prev, 0, ed);
  if (leg >= kInf) return false;
  r.ea_end = ed + leg;
  return r.ea_end <= P.horizon() + kTimeEps;
}

/// Backward pass: latest arrivals that keep the suffix (and the return to
/// the depot) feasible. Also derives the route's max free time. Requires a
/// feasible forward pass.
inline void backward_latest(const Problem& P, Route& r) {
  int L = r.size();
  r.la.assign(L, 0.0);
  double la_next = P.horizon();
  int next = 0;
  for (int i = L - 1; i >= 0; --i) {
    int v = r.seq[i];
    double dep = P.tt.latest_departure(v, next, la_next);
    double ls = P.tt.latest_start(P.service(v), dep);
    r.la[i] = std::min(P.l(v), ls);
    la_next = r.la[i];
    next = v;
  }
  r.la0 = r.empty() ? P.horizon() : P.tt.latest_departure(0, r.seq[0], r.la[0]);
  r.mft = std::max(r.la0 - 0.0, P.horizon() - r.ea_end);
  for (int i = 0; i < L; ++i) r.mft = std::max(r.mft, r.la[i] - r.ea[i]);
}

inline bool rebuild_route(const Problem& P, Route& r) {
  if (!forward_schedule(P, r)) return false;
  backward_latest(P, r);
  return true;
}

/// Lexicographic fitness: served workload (max), pool insertability (min),
/// max free time (max or min, configurable).
struct Fitness {
  double P = 0.0;
  double D = 0.0;
  double F = 0.0;
};

inline int compare_fitness(const Fitness& a, const Fitness& b,
                           bool maximize_mft = true) {
  if (a.P > b.P + kFitnessEps) return 1;
  if (b.P > a.P + kFitnessEps) return -1;
  if (a.D < b.D - kFitnessEps) return 1;
  if (b.D < a.D - kFitnessEps) return -1;
  double fa = maximize_mft ? a.F : -a.F;
  double fb = maximize_mft ? b.F : -b.F;
  if (fa > fb + kFitnessEps) return 1;
  if (fb > fa + kFitnessEps) return -1;
  return 0;
}

inline bool fitness_equal(const Fitness& a, const Fitness& b) {
  // D is +inf whenever some pool member fits nowhere; two such states are
  // equal in that component (inf - inf would be NaN).
  bool d_eq = (a.D >= kInf && b.D >= kInf) || std::abs(a.D - b.D) <= kFitnessEps;
  return std::abs(a.P - b.P) <= kFitnessEps && d_eq &&
         std::abs(a.F - b.F) <= kFitnessEps;
}

/// Violation of inserting u between positions pos-1 and pos of a feasible
/// route (pos in [0, size]): earliness/lateness of u against its window plus
/// the lateness pushed onto the successor, all measured against cached
/// earliest departures and latest arrivals. Zero means the insertion fits.
inline double insertion_violation(const Problem& P, const Route& r, int u,
                                  int pos) {
  int pred = pos == 0 ? 0 : r.seq[pos - 1];
  double ed_pred = pos == 0 ? 0.0 : r.ed[pos - 1];
  int succ = pos == r.size() ? 0 : r.seq[pos];
  double la_succ = pos == r.size() ? P.horizon() : r.la[pos];

  double leg = P.tt.query(pred, u, ed_pred);
  if (leg >= kInf) return kInf;
  double ea_u = ed_pred + leg;
  double sa = std::max(ea_u, P.e(u));
  // Lateness of the actual start, not the arrival: tightened windows can be
  // inverted (e > l when no start fits any period), and waiting until e
  // must then count as a violation.
  double t1 = std::max(sa - P.l(u), 0.0);

  double la_u = P.tt.latest_start(P.service(u), P.tt.latest_departure(u, succ, la_succ));
  double t2 = la_u <= -kInf ? kInf : std::max(P.e(u) - la_u, 0.0);

  double ed_u = P.tt.earliest_departure(sa, P.service(u));
  double t3;
  if (ed_u >= kInf) {
    t3 = kInf;
  } else {
    double leg2 = P.tt.query(u, succ, ed_u);
    t3 = leg2 >= kInf ? kInf : std::max(ed_u + leg2 - la_succ, 0.0);
  }
  if (t1 >= kInf || t2 >= kInf || t3 >= kInf) return kInf;
  return t1 + t2 + t3;
}

/// mv(u, r): how far route r is from being able to take u — the larger of a
/// scaled capacity overload and the cheapest insertion violation.
inline double min_violation(const Problem& P, const Route& r, int u, double eta) {
  double du = P.workload(u);
  double mvl = 0.0;
  if (r.wl + du > P.q() + kTimeEps)
    mvl = P.horizon() * (r.wl + du - P.q()) / (r.wl + du);
  double mvt = kInf;
  for (int pos = 0; pos <= r.size(); ++pos)
    mvt = std::min(mvt, insertion_violation(P, r, u, pos));
  return std::max(eta * mvl, mvt);
}

struct Solution {
  std::vector<Route> routes;
  std::vector<int> pool;                // unserved suppliers, ascending
  std::vector<std::vector<double>> mv;  // aligned with pool: mv[k][route]
  Fitness fit;
};

inline Solution empty_solution(const Problem& P) {
  Solution s;
  s.routes.resize(P.m());
  for (Route& r : s.routes) rebuild_route(P, r);
  s.pool.resize(P.n());
  for (int i = 0; i < P.n(); ++i) s.pool[i] = i + 1;
  return s;
}

/// D-term: ascending mv values weighted by 1/rank, so the most insertable
/// pool members dominate.
inline double pool_distance(std::vector<double> mins) {
  std::sort(mins.begin(), mins.end());
  double d = 0.0;
  for (std::size_t i = 0; i < mins.size(); ++i) {
    if (mins[i] >= kInf) return kInf;
    d += mins[i] / static_cast<double>(i + 1);
  }
  return d;
}

inline void recompute_fitness(const Problem& P, Solution& S, double eta) {
  S.fit.P = 0.0;
  S.fit.F = 0.0;
  for (const Route& r : S.routes) {
    S.fit.P += r.wl;
    S.fit.F += r.mft;
  }
  S.mv.assign(S.pool.size(), std::vector<double>(S.routes.size(), kInf));
  std::vector<double> mins(S.pool.size(), kInf);
  for (std::size_t k = 0; k < S.pool.size(); ++k) {
    for (std::size_t r = 0; r < S.routes.size(); ++r) {
      S.mv[k][r] = min_violation(P, S.routes[r], S.pool[k], eta);
      mins[k] = std::min(mins[k], S.mv[k][r]);
    }
  }
  S.fit.D = pool_distance(std::move(mins));
}

inline std::uint64_t structural_hash(const Solution& S) {
  std::uint64_t h = 14695981039346656037ull;
  for (const Route& r : S.routes) {
    h = fnv1a_mix(h, 0x7fffffffull);
    for (int v : r.seq) h = fnv1a_mix(h, static_cast<std::uint64_t>(v));
  }
  h = fnv1a_mix(h, 0x5fffffffull);
  for (int v : S.pool) h = fnv1a_mix(h, static_cast<std::uint64_t>(v));
  return h;
}

/// Full structural + numerical audit; nullopt when consistent. Used by
/// tests and debug assertions, not on the hot path.
inline std::optional<std::string> check_solution(const Problem& P,
                                                 const Solution& S) {
  std::vector<int> seen(P.n() + 1, 0);
  for (const Route& r : S.routes) {
    Route copy;
    copy.seq = r.seq;
    if (!rebuild_route(P, copy)) return "infeasible route in solution";
    if (std::abs(copy.wl - r.wl) > 1e-6) return "stale workload cache";
    for (int i = 0; i < r.size(); ++i) {
      if (std::abs(copy.ed[i] - r.ed[i]) > 1e-6) return "stale forward cache";
      if (std::abs(copy.la[i] - r.la[i]) > 1e-6) return "stale backward cache";
      if (copy.la[i] + kTimeEps < copy.sa[i] - 1e-9) return "la below start";
    }
    for (int v : r.seq) {
      if (v < 1 || v > P.n() || seen[v]++) return "duplicate or bad vertex";
    }
  }
  for (int v : S.pool) {
    if (v < 1 || v > P.n() || seen[v]++) return "duplicate or bad pool entry";
  }
  for (int v = 1; v <= P.n(); ++v)
    if (!seen[v]) return "supplier lost";
  if (!std::is_sorted(S.pool.begin(), S.pool.end())) return "pool not sorted";
  return std::nullopt;
}

inline std::string format_solution(const Problem& P, const Solution& S) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  out << "P=" << S.fit.P << " D=" << S.fit.D << " F=" << S.fit.F << "\n";
  for (std::size_t k = 0; k < S.routes.size(); ++k) {
    const Route& r = S.routes[k];
    out << "route " << k << " (wl=" << r.wl << ", back=" << r.ea_end << "): 0";
    for (int i = 0; i < r.size(); ++i)
      out << " -> " << r.seq[i] << "[" << r.sa[i] << "]";
    out << " -> 0\n";
  }
  out << "pool:";
  for (int v : S.pool) out << " " << v;
  out << "\n";
  (void)P;
  return out.str();
}

}  // namespace mpisp
