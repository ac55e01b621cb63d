#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <queue>
#include <vector>

#include "mpisp/common.hpp"
#include "mpisp/instance.hpp"

namespace mpisp {

/// Ceiling of an *elapsed* duration on the unbounded uniform grid of period
/// length T: smallest positive multiple of T that is >= x (so 0 maps to T —
/// a full period lies ahead of a departure at an opening, and an exact
/// multiple maps to itself). Used only while building the base tables, where
/// departures are anchored at period openings and the grid extends freely.
inline double elapsed_ceil(double x, double T) {
  auto q = static_cast<long long>(std::ceil((x - kTimeEps) / T));
  return T * static_cast<double>(std::max(1ll, q));
}

/// Period-aware shortest transit preprocessing and queries.
///
/// base(i, j) is the minimum elapsed time from i to j when departing at a
/// period opening, allowing overnight waypoint stops (each travel leg must
/// fit inside one period; a leg that does not fit the residual waits at the
/// current vertex until the next opening). query(i, j, dt) answers the same
/// question for an arbitrary departure instant via per-source neighbor
/// prefix minima and a binary search, in O(log n).
class TransitTables {
 public:
  static TransitTables compute(const Instance& inst) {
    TransitTables tt;
    tt.grid_ = inst.grid;
    tt.travel_ = inst.travel;
    int nv = static_cast<int>(inst.travel.size());
    double T = inst.grid.length();

    tt.base_.assign(nv, std::vector<double>(nv, kInf));
    for (int src = 0; src < nv; ++src) dijkstra(inst, src, tt.base_[src], T);

    // Neighbor lists: vertices reachable in one in-period leg, nearest
    // first; self (t = 0) is always index 0 modulo exact ties. Prefix minima
    // over their base rows answer "best overnight relay within residual r".
    tt.order_.resize(nv);
    tt.prefix_.resize(nv);
    for (int i = 0; i < nv; ++i) {
      auto& ord = tt.order_[i];
      for (int u = 0; u < nv; ++u)
        if (inst.travel[i][u] <= T + kTimeEps) ord.push_back({inst.travel[i][u], u});
      std::sort(ord.begin(), ord.end());
      auto& pm = tt.prefix_[i];
      pm.assign(ord.size(), std::vector<double>(nv, kInf));
      for (std::size_t k = 0; k < ord.size(); ++k) {
        const std::vector<double>& row = tt.base_[ord[k].vertex];
        for (int j = 0; j < nv; ++j)
          pm[k][j] = k == 0 ? row[j] : std::min(pm[k - 1][j], row[j]);
      }
    }
    return tt;
  }

  const PeriodGrid& grid() const { return grid_; }
  int vertices() const { return static_cast<int>(base_.size()); }

  /// Minimum elapsed transit when departing at a period opening.
  double base(int i, int j) const { return base_[i][j]; }

  /// Minimum transit from i to j departing at absolute instant dt in
  /// [0, horizon]. +inf when unreachable before the grid runs out of the
  /// departure period's residual and no relay is near enough.
  double query(int i, int j, double dt) const {
    if (i == j) return 0.0;
    double direct = travel_[i][j];
    double resid = std::max(grid_.ceil_of(dt) - dt, 0.0);
    if (resid + kTimeEps >= direct) return direct;
    // Wait out the period at the best relay reachable within the residual.
    const auto& ord = order_[i];
    auto it = std::upper_bound(
        ord.begin(), ord.end(), resid + kTimeEps,
        [](double r, const Hop& h) { return r < h.dist; });
    auto k = static_cast<std::size_t>(it - ord.begin());
    // ord[0].dist == 0 <= resid, so k >= 1 always.
    return resid + prefix_[i][k - 1][j];
  }

  /// Departure time after an uninterruptible service of length s starting at
  /// `start` (the service start, not the arrival): start + s when it fits the
  /// residual, next opening + s otherwise. +inf when the completed service
  /// would overrun the horizon.
  double earliest_departure(double start, double s) const {
    if (start > grid_.horizon + kTimeEps) return kInf;
    if (s <= kTimeEps) return start;
    if (s > grid_.length() + kTimeEps) return kInf;  // can never fit a period
    double resid = std::max(grid_.ceil_of(start) - start, 0.0);
    double ed = resid + kTimeEps >= s ? start + s : grid_.ceil_of(start) + s;
    return ed > grid_.horizon + kTimeEps ? kInf : ed;
  }

  /// Latest service start whose departure is still <= dep_deadline; -inf if
  /// none exists.
  double latest_start(double s, double dep_deadline) const {
    double deadline = std::min(dep_deadline, grid_.horizon);
    if (s <= kTimeEps) return deadline < -kTimeEps ? -kInf : deadline;
    if (s > grid_.length() + kTimeEps) return -kInf;
    double tau = deadline - s;
    if (tau < -kTimeEps) return -kInf;
    tau = std::max(tau, 0.0);
    double resid = std::max(grid_.ceil_of(tau) - tau, 0.0);
    if (resid + kTimeEps >= s) return tau;
    // tau sits in a dead zone; either it is itself a boundary (start there
    // runs in the next period) or fall back to the last fitting start.
    if (grid_.ceil_of(tau) + s <= deadline + kTimeEps) return tau;
    return grid_.ceil_of(tau) - s;
  }

  /// Latest departure dt from i whose arrival at j is <= deadline; -inf if
  /// none exists. Scans periods from the deadline backwards; within one
  /// period the direct-leg branch and the relay branch are each monotone.
  double latest_departure(int i, int j, double deadline) const {
    if (deadline < -kTimeEps) return -kInf;
    if (i == j) return std::min(deadline, grid_.horizon);
    double direct = travel_[i][j];
    const auto& ord = order_[i];
    const auto& pm = prefix_[i];
    int pmax = grid_.period_ceil(std::min(deadline, grid_.horizon));
    for (int p = pmax; p >= 1; --p) {
      double a = grid_.open(p), b = grid_.close(p);
      double best = -kInf;
      double cand1 = std::min({b - direct, deadline - direct, grid_.horizon});
      if (cand1 >= a - kTimeEps) best = cand1;
      if (deadline + kTimeEps >= b && !ord.empty()) {
        double rem = deadline - b;
        // Smallest prefix k whose relay minimum fits the remaining time;
        // prefix minima are non-increasing in k.
        auto it = std::partition_point(
            pm.begin(), pm.end(),
            [&](const std::vector<double>& row) { return row[j] > rem + kTimeEps; });
        if (it != pm.end()) {
          auto k = static_cast<std::size_t>(it - pm.begin());
          double cand2 = std::min(b - ord[k].dist, grid_.horizon);
          if (cand2 >= a - kTimeEps) best = std::max(best, cand2);
        }
      }
      if (best > -kInf) return best;
    }
    return -kInf;
  }

  /// Binary cache keyed by an instance fingerprint; load refuses mismatches.
  void dump(std::ostream& out, std::uint64_t instance_hash) const {
    auto put64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    out.write("MPTT1\0", 6);
    put64(instance_hash);
    put64(static_cast<std::uint64_t>(base_.size()));
    put64(static_cast<std::uint64_t>(grid_.w));
    out.write(reinterpret_cast<const char*>(&grid_.horizon), sizeof(double));
    auto put_row = [&](const std::vector<double>& row) {
      out.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(double)));
    };
    for (const auto& row : base_) put_row(row);
    for (int i = 0; i < vertices(); ++i) {
      put64(order_[i].size());
      for (const Hop& h : order_[i]) {
        out.write(reinterpret_cast<const char*>(&h.dist), sizeof(double));
        put64(static_cast<std::uint64_t>(h.vertex));
      }
      for (const auto& row : prefix_[i]) put_row(row);
    }
    for (const auto& row : travel_) put_row(row);
  }

  static std::optional<TransitTables> load(std::istream& in, std::uint64_t instance_hash) {
    char magic[6];
    if (!in.read(magic, 6) || std::string_view(magic, 6) != std::string_view("MPTT1\0", 6))
      return std::nullopt;
    auto get64 = [&]() {
      std::uint64_t v = 0;
      in.read(reinterpret_cast<char*>(&v), 8);
      return v;
    };
    if (get64() != instance_hash) return std::nullopt;
    TransitTables tt;
    auto nv = static_cast<std::size_t>(get64());
    tt.grid_.w = static_cast<int>(get64());
    in.read(reinterpret_cast<char*>(&tt.grid_.horizon), sizeof(double));
    auto get_row = [&](std::vector<double>& row) {
      row.resize(nv);
      in.read(reinterpret_cast<char*>(row.data()),
              static_cast<std::streamsize>(nv * sizeof(double)));
    };
    tt.base_.resize(nv);
    for (auto& row : tt.base_) get_row(row);
    tt.order_.resize(nv);
    tt.prefix_.resize(nv);
    for (std::size_t i = 0; i < nv; ++i) {
      auto h = static_cast<std::size_t>(get64());
      tt.order_[i].resize(h);
      for (auto& hop : tt.order_[i]) {
        in.read(reinterpret_cast<char*>(&hop.dist), sizeof(double));
        hop.vertex = static_cast<int>(get64());
      }
      tt.prefix_[i].resize(h);
      for (auto& row : tt.prefix_[i]) get_row(row);
    }
    tt.travel_.resize(nv);
    for (auto& row : tt.travel_) get_row(row);
    if (!in) return std::nullopt;
    return tt;
  }

 private:
  struct Hop {
    double dist = 0;
    int vertex = 0;
    bool operator<(const Hop& o) const {
      return dist != o.dist ? dist < o.dist : vertex < o.vertex;
    }
  };

  /// Label-setting shortest elapsed transit from src at a period opening.
  /// Extension of a settled label du over edge (u, j): direct when the leg
  /// fits the residual of du's period, else wait at u for the next opening;
  /// legs longer than one period never traverse. The extension is monotone
  /// in du, so Dijkstra settles correctly. Ties pop by smaller vertex id.
  static void dijkstra(const Instance& inst, int src, std::vector<double>& dist, double T) {
    int nv = static_cast<int>(inst.travel.size());
    dist.assign(nv, kInf);
    dist[src] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.push({0.0, src});
    std::vector<char> done(nv, 0);
    while (!pq.empty()) {
      auto [du, u] = pq.top();
      pq.pop();
      if (done[u]) continue;
      done[u] = 1;
      double opening = elapsed_ceil(du, T);
      double resid = opening - du;
      for (int j = 0; j < nv; ++j) {
        if (done[j]) continue;
        double leg = inst.travel[u][j];
        if (u == j) continue;
        double cand;
        if (resid + kTimeEps >= leg)
          cand = du + leg;
        else if (leg <= T + kTimeEps)
          cand = opening + leg;
        else
          continue;
        if (cand < dist[j]) {
          dist[j] = cand;
          pq.push({cand, j});
        }
      }
    }
  }

  PeriodGrid grid_;
  std::vector<std::vector<double>> travel_;
  std::vector<std::vector<double>> base_;
  std::vector<std::vector<Hop>> order_;
  std::vector<std::vector<std::vector<double>>> prefix_;
};

}  // namespace mpisp
