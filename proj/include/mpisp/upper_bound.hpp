#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mpisp/solution.hpp"

namespace mpisp {

namespace detail {

/// Shortest round-trip decimal form; deterministic across runs (to_chars).
inline std::string num_str(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

/// Coefficients of the assignment relaxation used to bound the best
/// attainable served workload from above.
///
/// The relaxation keeps only cheap necessary conditions of a feasible
/// schedule and drops routing order entirely:
///   f1[i]      -- the effective (tightened) window admits some start,
///   f2[i][p]   -- some admissible start of i lies in period p,
///   f3[i][j]   -- i and j can coexist on one route: one of the two
///                 earliest-first orders respects both deadlines. Judged on
///                 the instance's raw windows (a start may still wait into
///                 the next period), so this flag is deliberately the weak
///                 form of the test.
///   r[i][p]    -- cheapest raw leg from i to any other vertex that is
///                 still servable in period p and co-servable with i
///                 (+inf when no such vertex exists),
///   lambda[i]  -- depot-return bound of a route that serves i last:
///                 service ends no later than l[i] + s[i], rounded up to
///                 the next integer instant, plus the direct leg home.
/// All travel coefficients use the raw matrix, which never exceeds the
/// period-aware transit time, so every feasible schedule satisfies every
/// row of the model built from these numbers.
struct UbCoeffs {
  std::vector<char> f1;                   // [n+1]; f1[0] = 1
  std::vector<std::vector<char>> f2;      // [n+1][w+1]; depot row all 1
  std::vector<std::vector<char>> f3;      // [n+1][n+1]; symmetric, diag 1
  std::vector<std::vector<double>> r;     // [n+1][w+1]; +inf when no neighbour
  std::vector<std::vector<double>> rsuf;  // rsuf[i][p] = min_{p' >= p} r[i][p']
  std::vector<double> lambda;             // [n+1]; depot-return bound, i last
  std::vector<double> lambda_g;           // [m] descending; +inf pad when m > n
  double r0 = 0.0;                        // cheapest first-period egress leg
};

inline UbCoeffs derive_coefficients(const Problem& P) {
  const int n = P.n(), m = P.m(), w = P.grid().w;
  const auto& tv = P.inst.travel;
  UbCoeffs co;

  co.f1.assign(n + 1, 0);
  co.f1[0] = 1;
  for (int i = 1; i <= n; ++i)
    co.f1[i] = P.e(i) <= P.l(i) + kTimeEps ? 1 : 0;

  // Starts live in [e, l]; period membership of a start is left-closed, so
  // the admissible periods form the contiguous block between the periods of
  // the two endpoints. The depot "serves" (waits) at any time.
  co.f2.assign(n + 1, std::vector<char>(w + 1, 0));
  for (int p = 1; p <= w; ++p) co.f2[0][p] = 1;
  for (int i = 1; i <= n; ++i) {
    if (!co.f1[i]) continue;
    int lo = P.grid().period_start(P.e(i));
    int hi = P.grid().period_start(P.l(i));
    for (int p = lo; p <= hi; ++p) co.f2[i][p] = 1;
  }

  // Two-sided co-servability: if i and j share a route, the one served
  // first -- at its earliest start, with a direct raw leg -- must still
  // allow the other to meet its deadline. Both orders failing proves the
  // pair incompatible. Raw instance windows are used: a start inside a
  // too-short period remainder merely waits for the next opening, which
  // tightened endpoints would miscount as a conflict. The depot
  // participates with window [0, horizon] and zero service.
  const double horizon = P.grid().horizon;
  auto raw_e = [&](int v) { return v == 0 ? 0.0 : P.inst.supplier(v).e; };
  auto raw_l = [&](int v) { return v == 0 ? horizon : P.inst.supplier(v).l; };
  co.f3.assign(n + 1, std::vector<char>(n + 1, 1));
  for (int i = 0; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      bool ij = raw_e(i) + P.service(i) + tv[i][j] <= raw_l(j) + kTimeEps;
      bool ji = raw_e(j) + P.service(j) + tv[j][i] <= raw_l(i) + kTimeEps;
      co.f3[i][j] = co.f3[j][i] = (ij || ji) ? 1 : 0;
    }

  // Cheapest admissible onward leg of i while period p is live: travel
  // towards any vertex servable in p and co-servable with i (the depot
  // qualifies whenever a served-and-returned i is possible at all).
  co.r.assign(n + 1, std::vector<double>(w + 1, kInf));
  for (int i = 1; i <= n; ++i)
    for (int p = 1; p <= w; ++p) {
      double best = kInf;
      for (int j = 0; j <= n; ++j) {
        if (j == i || !co.f2[j][p] || !co.f3[i][j]) continue;
        best = std::min(best, tv[i][j]);
      }
      co.r[i][p] = best;
    }
  co.rsuf = co.r;
  for (int i = 1; i <= n; ++i)
    for (int p = w - 1; p >= 1; --p)
      co.rsuf[i][p] = std::min(co.r[i][p], co.rsuf[i][p + 1]);

  // Service of i ends no later than l[i] + s[i]; rounding that instant up
  // to the next integer and adding the direct leg home bounds the return.
  co.lambda.assign(n + 1, 0.0);
  for (int i = 1; i <= n; ++i)
    co.lambda[i] = std::ceil(P.l(i) + P.service(i)) + P.tt.base(i, 0);

  // The m largest return bounds, matched to inspectors in index order: the
  // k-th busiest route returns no later than the k-th largest lambda.
  std::vector<double> pool(co.lambda.begin() + 1, co.lambda.end());
  while (static_cast<int>(pool.size()) < m) pool.push_back(kInf);
  std::sort(pool.begin(), pool.end(), std::greater<>());
  pool.resize(m);
  co.lambda_g = std::move(pool);

  // Cheapest opening leg: every non-empty route starts with a move from the
  // depot to some servable supplier, so the smallest such leg is a valid
  // charge against every return budget.
  co.r0 = 0.0;
  if (n > 0) {
    double best = kInf;
    for (int j = 1; j <= n; ++j)
      if (co.f1[j]) best = std::min(best, tv[0][j]);
    co.r0 = best < kInf ? best : 0.0;
  }
  return co;
}

struct UbTerm {
  int var = 0;
  double coef = 0.0;
};

/// One inequality: sum of terms <= rhs.
struct UbRow {
  std::string name;
  std::vector<UbTerm> terms;
  double rhs = 0.0;
};

/// Model-shape switches.
struct UbOptions {
  /// Adds per-(inspector, period) rows charging each service started in a
  /// period with its cheapest onward leg against the period length (plus
  /// one free maximum). A valid strengthening, but off by default: the
  /// benchmark bounds this library reproduces are defined without it.
  bool period_budget = false;
};

/// Binary program over x[i][k][p] = "inspector k starts serving supplier i
/// in period p". Rows with an infinite right-hand side or infinite
/// coefficients are never materialised: an infinite rhs is vacuous, and a
/// variable whose every onward-leg coefficient is infinite is pinned to
/// zero instead (fixed_zero).
struct UbModel {
  int n = 0, m = 0, w = 0;
  double q = 0.0;
  std::vector<double> obj;       // per-variable objective (supplier workload)
  std::vector<char> fixed_zero;  // variables pinned to zero
  std::vector<UbRow> rows;
  int rows_assign = 0;    // one service per supplier
  int rows_period = 0;    // per (i, p) servability
  int rows_conflict = 0;  // incompatible pair on one inspector
  int rows_capacity = 0;  // per-inspector workload capacity
  int rows_return = 0;    // per-inspector depot-return budget
  int rows_budget = 0;    // per (k, p) period-length budget
  UbCoeffs co;

  int vars() const { return n * m * w; }
  int index(int i, int k, int p) const {
    return ((i - 1) * m + (k - 1)) * w + (p - 1);
  }
  std::string var_name(int v) const {
    int p = v % w + 1;
    v /= w;
    int k = v % m + 1;
    int i = v / m + 1;
    return "x_" + std::to_string(i) + "_" + std::to_string(k) + "_" +
           std::to_string(p);
  }
};

inline UbModel build_model(const Problem& P, const UbOptions& opt = {}) {
  UbModel M;
  M.n = P.n();
  M.m = P.m();
  M.w = P.grid().w;
  M.q = P.q();
  M.co = derive_coefficients(P);
  const UbCoeffs& co = M.co;
  const int n = M.n, m = M.m, w = M.w;

  M.obj.assign(M.vars(), 0.0);
  M.fixed_zero.assign(M.vars(), 0);
  for (int i = 1; i <= n; ++i)
    for (int k = 1; k <= m; ++k)
      for (int p = 1; p <= w; ++p) {
        int v = M.index(i, k, p);
        M.obj[v] = P.workload(i);
        // No finite onward leg in p or any later period: the service could
        // never be followed by a return to the depot.
        if (co.rsuf[i][p] >= kInf) M.fixed_zero[v] = 1;
      }
  auto alive = [&](int i, int k, int p) {
    return !M.fixed_zero[M.index(i, k, p)];
  };

  // One service per supplier; unservable windows force zero.
  for (int i = 1; i <= n; ++i) {
    UbRow row{"assign_" + std::to_string(i), {}, co.f1[i] ? 1.0 : 0.0};
    for (int k = 1; k <= m; ++k)
      for (int p = 1; p <= w; ++p)
        if (alive(i, k, p)) row.terms.push_back({M.index(i, k, p), 1.0});
    if (!row.terms.empty()) {
      M.rows.push_back(std::move(row));
      ++M.rows_assign;
    }
  }

  // Per-period servability (content is the zero right-hand side when no
  // admissible start of i lies in p).
  for (int i = 1; i <= n; ++i)
    for (int p = 1; p <= w; ++p) {
      UbRow row{"period_" + std::to_string(i) + "_" + std::to_string(p),
                {},
                co.f2[i][p] ? 1.0 : 0.0};
      for (int k = 1; k <= m; ++k)
        if (alive(i, k, p)) row.terms.push_back({M.index(i, k, p), 1.0});
      if (!row.terms.empty()) {
        M.rows.push_back(std::move(row));
        ++M.rows_period;
      }
    }

  // Incompatible pairs never share an inspector. Only violated pairs of
  // servable suppliers produce a row.
  for (int k = 1; k <= m; ++k)
    for (int i = 1; i <= n; ++i) {
      if (!co.f1[i]) continue;
      for (int j = i + 1; j <= n; ++j) {
        if (!co.f1[j] || co.f3[i][j]) continue;
        UbRow row{"conflict_" + std::to_string(k) + "_" + std::to_string(i) +
                      "_" + std::to_string(j),
                  {},
                  1.0};
        for (int p = 1; p <= w; ++p) {
          if (alive(i, k, p)) row.terms.push_back({M.index(i, k, p), 1.0});
          if (alive(j, k, p)) row.terms.push_back({M.index(j, k, p), 1.0});
        }
        if (!row.terms.empty()) {
          M.rows.push_back(std::move(row));
          ++M.rows_conflict;
        }
      }
    }

  // Workload capacity per inspector (absent for uncapacitated instances).
  if (M.q < kInf) {
    for (int k = 1; k <= m; ++k) {
      UbRow row{"cap_" + std::to_string(k), {}, M.q};
      for (int i = 1; i <= n; ++i) {
        if (P.workload(i) == 0.0) continue;
        for (int p = 1; p <= w; ++p)
          if (alive(i, k, p))
            row.terms.push_back({M.index(i, k, p), P.workload(i)});
      }
      M.rows.push_back(std::move(row));
      ++M.rows_capacity;
    }
  }

  // Depot-return budget per inspector: every served supplier consumes its
  // service plus the cheapest onward leg available from its start period
  // onwards, the first leg out of the depot costs at least r0, and the k-th
  // inspector must be home by the k-th largest return bound.
  for (int k = 1; k <= m; ++k) {
    if (co.lambda_g[k - 1] >= kInf) continue;  // vacuous
    double rhs = std::max(co.lambda_g[k - 1] - co.r0, 0.0);
    UbRow row{"ret_" + std::to_string(k), {}, rhs};
    for (int i = 1; i <= n; ++i)
      for (int p = 1; p <= w; ++p)
        if (alive(i, k, p))
          row.terms.push_back(
              {M.index(i, k, p), P.service(i) + co.rsuf[i][p]});
    M.rows.push_back(std::move(row));
    ++M.rows_return;
  }

  // Optional strengthening -- period-length budget per (inspector, period):
  // services started in p, plus the onward leg of each except the last,
  // fit into one period. The slack is the largest r over all suppliers; if
  // any r in p is infinite the row is vacuous and dropped.
  if (opt.period_budget) {
    for (int p = 1; p <= w; ++p) {
      double rmax = 0.0;
      for (int i = 1; i <= n; ++i) rmax = std::max(rmax, co.r[i][p]);
      if (rmax >= kInf) continue;
      double rhs = P.grid().length() + rmax;
      for (int k = 1; k <= m; ++k) {
        UbRow row{"pbud_" + std::to_string(k) + "_" + std::to_string(p),
                  {},
                  rhs};
        for (int i = 1; i <= n; ++i)
          if (alive(i, k, p))
            row.terms.push_back(
                {M.index(i, k, p), P.service(i) + co.r[i][p]});
        if (!row.terms.empty()) {
          M.rows.push_back(std::move(row));
          ++M.rows_budget;
        }
      }
    }
  }
  return M;
}

namespace detail {

inline void append_lp_terms(std::string& out, const std::vector<UbTerm>& terms,
                            const UbModel& M) {
  int on_line = 0;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    if (on_line == 8) {  // keep lines short; continuations start with a blank
      out += "\n   ";
      on_line = 0;
    }
    if (t > 0) out += " +";
    double c = terms[t].coef;
    if (c != 1.0) out += " " + num_str(c);
    out += " " + M.var_name(terms[t].var);
    ++on_line;
  }
}

}  // namespace detail

/// Serialises the model in LP format (CPLEX dialect): objective, `<=` rows,
/// fixed bounds, binaries. Output is deterministic for a given model; the
/// leading comments carry the per-family row counts.
inline std::string emit_lp(const UbModel& M, std::string_view name) {
  std::string out;
  out += "\\ ";
  out += name;
  out += " assignment relaxation (maximise served workload)\n";
  int fixed = static_cast<int>(
      std::count(M.fixed_zero.begin(), M.fixed_zero.end(), char(1)));
  out += "\\ suppliers=" + std::to_string(M.n) +
         " inspectors=" + std::to_string(M.m) +
         " periods=" + std::to_string(M.w) +
         " vars=" + std::to_string(M.vars()) +
         " fixed=" + std::to_string(fixed) + "\n";
  out += "\\ rows: assign=" + std::to_string(M.rows_assign) +
         " period=" + std::to_string(M.rows_period) +
         " conflict=" + std::to_string(M.rows_conflict) +
         " capacity=" + std::to_string(M.rows_capacity) +
         " return=" + std::to_string(M.rows_return) +
         " period_budget=" + std::to_string(M.rows_budget) + "\n";
  out += "Maximize\n obj:";
  std::vector<UbTerm> objective;
  for (int v = 0; v < M.vars(); ++v)
    if (!M.fixed_zero[v] && M.obj[v] != 0.0) objective.push_back({v, M.obj[v]});
  detail::append_lp_terms(out, objective, M);
  out += "\nSubject To\n";
  for (const UbRow& row : M.rows) {
    out += " " + row.name + ":";
    detail::append_lp_terms(out, row.terms, M);
    out += " <= " + detail::num_str(row.rhs) + "\n";
  }
  out += "Bounds\n";
  for (int v = 0; v < M.vars(); ++v)
    if (M.fixed_zero[v]) out += " " + M.var_name(v) + " = 0\n";
  out += "Binaries\n";
  int on_line = 0;
  for (int v = 0; v < M.vars(); ++v) {
    if (M.fixed_zero[v]) continue;
    if (on_line == 8) {
      out += "\n";
      on_line = 0;
    }
    out += " " + M.var_name(v);
    ++on_line;
  }
  if (on_line > 0) out += "\n";
  out += "End\n";
  return out;
}

struct UbSolveResult {
  double value = 0.0;    // best assignment found
  double bound = 0.0;    // valid upper bound on the model optimum
  bool optimal = false;  // search completed within the node budget
  std::uint64_t nodes = 0;
};

namespace detail {

/// Depth-first branch-and-bound over the assignment model. Suppliers are
/// branched in descending-demand order (ties by id); each node either places
/// the supplier on some (inspector, period) or skips it. Pruning uses the
/// cheaper of two fractional relaxations: total remaining capacity, and the
/// pooled depot-return budget with the supplier's cheapest possible
/// consumption. Fully deterministic.
class UbBranchBound {
 public:
  UbBranchBound(const Problem& P, const UbModel& M, std::uint64_t budget)
      : P_(P), M_(M), budget_(budget) {
    const UbCoeffs& co = M.co;
    for (int i = 1; i <= M.n; ++i) {
      if (!co.f1[i]) continue;
      Sup s;
      s.id = i;
      s.d = P.workload(i);
      s.w13 = kInf;
      for (int p = 1; p <= M.w; ++p) {
        if (!co.f2[i][p] || M.fixed_zero[M.index(i, 1, p)]) continue;
        s.periods.push_back(p);
        s.w13 = std::min(s.w13, P.service(i) + co.rsuf[i][p]);
      }
      if (s.periods.empty()) continue;
      order_.push_back(std::move(s));
    }
    std::sort(order_.begin(), order_.end(), [](const Sup& a, const Sup& b) {
      if (a.d != b.d) return a.d > b.d;
      return a.id < b.id;
    });
    rem_d_.assign(order_.size() + 1, 0.0);
    for (std::size_t t = order_.size(); t-- > 0;)
      rem_d_[t] = rem_d_[t + 1] + order_[t].d;
    ratio_.resize(order_.size());
    for (std::size_t t = 0; t < order_.size(); ++t) ratio_[t] = t;
    std::sort(ratio_.begin(), ratio_.end(), [&](std::size_t a, std::size_t b) {
      double ra = order_[a].w13 > 0 ? order_[a].d / order_[a].w13 : kInf;
      double rb = order_[b].w13 > 0 ? order_[b].d / order_[b].w13 : kInf;
      if (ra != rb) return ra > rb;
      return order_[a].id < order_[b].id;
    });

    cap_used_.assign(M.m + 1, 0.0);
    ret_used_.assign(M.m + 1, 0.0);
    ret_rhs_.assign(M.m + 1, kInf);
    for (int k = 1; k <= M.m; ++k)
      if (co.lambda_g[k - 1] < kInf)
        ret_rhs_[k] = std::max(co.lambda_g[k - 1] - co.r0, 0.0);
    pb_used_.assign(M.m + 1, std::vector<double>(M.w + 1, 0.0));
    pb_rhs_.assign(M.w + 1, kInf);
    if (M.rows_budget > 0) {  // mirror the model: absent rows bind nothing
      for (int p = 1; p <= M.w; ++p) {
        double rmax = 0.0;
        for (int i = 1; i <= M.n; ++i) rmax = std::max(rmax, co.r[i][p]);
        if (rmax < kInf) pb_rhs_[p] = grid_len() + rmax;
      }
    }
    served_.assign(M.m + 1, {});
  }

  UbSolveResult run() {
    dfs(0, 0.0);
    UbSolveResult res;
    res.value = best_;
    res.optimal = !aborted_;
    res.bound = aborted_ ? std::max(best_, pending_) : best_;
    res.nodes = nodes_;
    return res;
  }

 private:
  struct Sup {
    int id = 0;
    double d = 0.0;
    double w13 = 0.0;          // cheapest return-budget consumption
    std::vector<int> periods;  // admissible, ascending
  };

  double grid_len() const { return P_.grid().length(); }

  double bound(std::size_t t, double cur) const {
    // Remaining-demand vs pooled capacity.
    double rem = rem_d_[t];
    double cap = 0.0;
    bool cap_inf = M_.q >= kInf;
    if (!cap_inf)
      for (int k = 1; k <= M_.m; ++k)
        cap += std::max(M_.q - cap_used_[k], 0.0);
    double b1 = cap_inf ? rem : std::min(rem, cap);

    // Pooled depot-return budget, filled greedily by value density.
    double pool = 0.0;
    bool pool_inf = false;
    for (int k = 1; k <= M_.m; ++k) {
      if (ret_rhs_[k] >= kInf) {
        pool_inf = true;
        break;
      }
      pool += std::max(ret_rhs_[k] - ret_used_[k], 0.0);
    }
    double b2 = 0.0;
    if (pool_inf)
      b2 = rem;
    else
      for (std::size_t idx : ratio_) {
        if (idx < t) continue;  // already decided on the current path
        const Sup& s = order_[idx];
        if (s.w13 <= 0.0) {
          b2 += s.d;
          continue;
        }
        if (pool <= 0.0) break;
        double take = std::min(1.0, pool / s.w13);
        b2 += take * s.d;
        pool -= take * s.w13;
      }
    return cur + std::min(b1, b2);
  }

  void dfs(std::size_t t, double cur) {
    if (cur > best_) best_ = cur;
    if (t == order_.size()) return;
    if (nodes_ >= budget_) aborted_ = true;
    if (aborted_) {
      pending_ = std::max(pending_, bound(t, cur));
      return;
    }
    ++nodes_;
    double b = bound(t, cur);
    if (b <= best_ + kTimeEps) return;

    const Sup& s = order_[t];
    const UbCoeffs& co = M_.co;
    for (int k = 1; k <= M_.m; ++k) {
      // Interchangeable inspectors: among currently-empty ones with equal
      // return budgets, only the lowest index is tried.
      if (served_[k].empty()) {
        bool dup = false;
        for (int k2 = 1; k2 < k; ++k2)
          if (served_[k2].empty() && ret_rhs_[k2] == ret_rhs_[k]) {
            dup = true;
            break;
          }
        if (dup) continue;
      }
      if (M_.q < kInf && cap_used_[k] + s.d > M_.q + kTimeEps) continue;
      bool clash = false;
      for (int j : served_[k])
        if (!co.f3[s.id][j]) {
          clash = true;
          break;
        }
      if (clash) continue;
      for (int p : s.periods) {
        double c13 = P_.service(s.id) + co.rsuf[s.id][p];
        if (ret_used_[k] + c13 > ret_rhs_[k] + kTimeEps) continue;
        double c14 = P_.service(s.id) + co.r[s.id][p];
        if (pb_rhs_[p] < kInf &&
            pb_used_[k][p] + c14 > pb_rhs_[p] + kTimeEps)
          continue;
        cap_used_[k] += s.d;
        ret_used_[k] += c13;
        pb_used_[k][p] += c14;
        served_[k].push_back(s.id);
        dfs(t + 1, cur + s.d);
        served_[k].pop_back();
        pb_used_[k][p] -= c14;
        ret_used_[k] -= c13;
        cap_used_[k] -= s.d;
        if (aborted_) break;
      }
      if (aborted_) break;
    }
    if (!aborted_) dfs(t + 1, cur);  // skip the supplier
    if (aborted_) pending_ = std::max(pending_, b);
  }

  const Problem& P_;
  const UbModel& M_;
  std::uint64_t budget_ = 0;
  std::uint64_t nodes_ = 0;
  bool aborted_ = false;
  double best_ = 0.0;
  double pending_ = 0.0;
  std::vector<Sup> order_;
  std::vector<double> rem_d_;
  std::vector<std::size_t> ratio_;
  std::vector<double> cap_used_, ret_used_, ret_rhs_;
  std::vector<std::vector<double>> pb_used_;
  std::vector<double> pb_rhs_;
  std::vector<std::vector<int>> served_;
};

}  // namespace detail

/// Branch-and-bound over the assignment model at any size: the node budget
/// caps the search, and the result is a valid upper bound on the model
/// optimum whether or not the search completed (optimal tells which).
inline UbSolveResult bound_model(const Problem& P, const UbModel& M,
                                 std::uint64_t node_budget = 4'000'000) {
  return detail::UbBranchBound(P, M, node_budget).run();
}

/// Largest model solve_exact_small accepts; beyond this the depth-first
/// search cannot promise an exact optimum at desk scale.
inline constexpr int kExactModelVarLimit = 5000;

/// Exact optimum of the assignment model by branch-and-bound. Refuses
/// models beyond kExactModelVarLimit variables -- emit_lp the model and
/// hand it to an external solver instead.
inline UbSolveResult solve_exact_small(const Problem& P, const UbModel& M,
                                       std::uint64_t node_budget = 4'000'000) {
  if (M.vars() > kExactModelVarLimit)
    throw std::invalid_argument(
        "model has " + std::to_string(M.vars()) + " variables (limit " +
        std::to_string(kExactModelVarLimit) +
        "); write it out with emit_lp and use an external solver");
  return detail::UbBranchBound(P, M, node_budget).run();
}

/// Maps a feasible solution onto model variables and checks every
/// materialised row; returns a description of the first defect, or nullopt
/// when the solution satisfies the relaxation (as any feasible schedule
/// must). Routes are ranked by earliest depot return, descending, and paired
/// with inspectors in index order to mirror the return-budget rows.
inline std::optional<std::string> check_assignment(const Problem& P,
                                                   const UbModel& M,
                                                   const Solution& S) {
  std::vector<int> nonempty;
  for (int rr = 0; rr < static_cast<int>(S.routes.size()); ++rr)
    if (!S.routes[rr].empty()) nonempty.push_back(rr);
  if (static_cast<int>(nonempty.size()) > M.m)
    return "more non-empty routes than inspectors";
  std::stable_sort(nonempty.begin(), nonempty.end(), [&](int a, int b) {
    return S.routes[a].ea_end > S.routes[b].ea_end;
  });

  std::vector<double> x(M.vars(), 0.0);
  double served = 0.0;
  for (std::size_t rank = 0; rank < nonempty.size(); ++rank) {
    const Route& route = S.routes[nonempty[rank]];
    int k = static_cast<int>(rank) + 1;
    for (int pos = 0; pos < route.size(); ++pos) {
      int i = route.seq[pos];
      int p = P.grid().period_start(route.sa[pos]);
      int v = M.index(i, k, p);
      if (M.fixed_zero[v])
        return "fixed variable " + M.var_name(v) +
               " used by a feasible schedule";
      x[v] = 1.0;
      served += P.workload(i);
    }
  }
  if (std::abs(served - S.fit.P) > kFitnessEps)
    return "objective mismatch: mapped " + detail::num_str(served) +
           " vs fitness " + detail::num_str(S.fit.P);
  for (const UbRow& row : M.rows) {
    double lhs = 0.0;
    for (const UbTerm& tm : row.terms) lhs += tm.coef * x[tm.var];
    if (lhs > row.rhs + kFitnessEps)
      return "row " + row.name + " violated: " + detail::num_str(lhs) + " > " +
             detail::num_str(row.rhs);
  }
  return std::nullopt;
}

}  // namespace mpisp
