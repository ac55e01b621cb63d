#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <chrono>
#include <climits>
#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mpisp/solution.hpp"

namespace mpisp {

struct SearchParams {
  double eta = 1.0;          // weight of the capacity part inside mv
  int n_init = 100;          // randomized constructions to draw from
  int alpha1 = 5;            // greediness of the construction pick
  int max_perturbation = 4;  // consecutive non-improving outer iterations
  int max_local_iter = 200;  // consecutive non-improving local-search rounds
  int tenure = 100;          // tabu tenure (0 disables the tabu list)
  double beta1 = 0.6;        // ejection insertion: workload reward
  double beta2 = 0.4;        // ejection insertion: violation penalty
  double beta3 = 0.4;        // ejection choice: workload
  double beta4 = 0.4;        // ejection choice: capacity excess
  double beta5 = 0.2;        // ejection choice: window violation
  double p_min = 0.05;       // perturbation removal probability range
  double p_max = 0.30;
  double p_delta = 0.10;     // growth per repeated solution
  int n_max_rep = 5;         // cap on counted repetitions
  bool epa_insert_max = false;  // pick the largest-c insertion instead
  bool maximize_mft = true;     // direction of the F objective
  bool use_ls = true;           // component toggles
  bool use_ep = true;
  bool use_per = true;
  double target_p = kInf;       // stop early once the best P reaches this
  std::uint64_t time_limit_ms = 0;  // 0 = unlimited
};

struct IterRecord {
  int iter = 0;
  Fitness current{};
  Fitness best{};
  int pool_size = 0;
  double elapsed_s = 0.0;
};

struct SearchResult {
  Solution best;
  std::vector<IterRecord> trace;
  int iterations = 0;
  double seconds = 0.0;
  std::uint64_t ls_rounds = 0;
  std::uint64_t applied_moves = 0;
};

namespace detail {

using Clock = std::chrono::steady_clock;

/// Directed-edge tabu list; an edge is an (pred, succ) adjacency including
/// depot sentinels. A move is tabu when it removes an edge created within
/// the last `tenure` applied moves.
class TabuList {
 public:
  explicit TabuList(int n_vertices) : stride_(n_vertices) {}
  void clear() { expiry_.clear(); }
  void add(int a, int b, int until) {
    int& slot = expiry_[key(a, b)];
    slot = std::max(slot, until);
  }
  bool active(int a, int b, int iter) const {
    auto it = expiry_.find(key(a, b));
    return it != expiry_.end() && it->second > iter;
  }

 private:
  std::uint64_t key(int a, int b) const {
    return static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(stride_) +
           static_cast<std::uint64_t>(b);
  }
  int stride_;
  std::unordered_map<std::uint64_t, int> expiry_;
};

struct Edge {
  int a = 0, b = 0;
};

struct Cand {
  bool valid = false;
  int op = 0;           // operator rank, part of the tie-break
  int min_sup = INT_MAX;
  Fitness fit{};
  int r1 = -1, r2 = -1;
  Route nr1, nr2;
  bool pool_changed = false;
  std::vector<int> new_pool;
  std::array<Edge, 4> removed{}, created{};
  int n_removed = 0, n_created = 0;
};

/// Forward propagation that keeps going past violations, accumulating the
/// total window lateness (arrival past l', including the depot deadline).
/// Zero violation and zero capacity excess is exactly route feasibility.
struct RelaxedPass {
  double viol = 0.0;
  double cap_excess = 0.0;
  bool feasible() const {
    return viol <= kTimeEps && cap_excess <= kTimeEps;
  }
};

inline RelaxedPass relaxed_forward(const Problem& P, const std::vector<int>& seq) {
  RelaxedPass out;
  double ed = 0.0, wl = 0.0;
  int prev = 0;
  for (int v : seq) {
    double leg = ed <= P.horizon() + kTimeEps ? P.tt.query(prev, v, ed)
                                              : P.inst.travel[prev][v];
    if (leg >= kInf) {
      out.viol = kInf;
      break;
    }
    double ea = ed + leg;
    double sa = std::max(ea, P.e(v));
    // Start-vs-l, not arrival-vs-l: inverted tightened windows (e > l) must
    // register as violations even for early arrivals.
    out.viol += std::max(0.0, sa - P.l(v));
    double s = P.service(v);
    double start = sa;
    if (sa <= P.horizon() + kTimeEps) {
      double resid = P.grid().ceil_of(sa) - sa;
      if (resid + kTimeEps < s) {
        double pushed = P.grid().ceil_of(sa);
        // Once the push would overrun the horizon the route is already in
        // violation; keep plain accumulation to stay finite.
        if (pushed + s <= P.horizon() + kTimeEps) start = pushed;
      }
    }
    ed = start + s;
    wl += P.workload(v);
    prev = v;
  }
  if (out.viol < kInf) {
    double leg = ed <= P.horizon() + kTimeEps ? P.tt.query(prev, 0, ed)
                                              : P.inst.travel[prev][0];
    if (leg >= kInf)
      out.viol = kInf;
    else
      out.viol += std::max(0.0, ed + leg - P.horizon());
  }
  out.cap_excess = std::max(0.0, wl - P.q());
  return out;
}

class Searcher {
 public:
  Searcher(const Problem& problem, const SearchParams& params,
           std::optional<Clock::time_point> deadline = std::nullopt)
      : P(problem), prm(params), deadline_(deadline) {}

  std::uint64_t ls_rounds = 0;
  std::uint64_t applied_moves = 0;

  bool out_of_time() const {
    return deadline_ && Clock::now() >= *deadline_;
  }

  // ---------------------------------------------------------------- init --

  /// One randomized greedy construction: repeatedly append the cheapest
  /// feasible supplier (transit-per-workload rank, biased random pick) to
  /// the route whose tail is nearest in period-aware transit.
  Solution construct(Rng& rng) const {
    Solution S = empty_solution(P);
    int m = P.m();
    std::vector<int> U = S.pool;  // candidates, ascending ids
    // st[u][r]: appendable transit cost, +inf when the append is infeasible.
    std::vector<std::vector<double>> st(P.n() + 1,
                                        std::vector<double>(m, kInf));
    for (int u : U)
      for (int r = 0; r < m; ++r) st[u][r] = append_cost(S.routes[r], u);

    struct Scored {
      double rho;
      int id;
    };
    std::vector<Scored> order;
    while (!U.empty()) {
      order.clear();
      for (int u : U) {
        double best = kInf;
        for (int r = 0; r < m; ++r) best = std::min(best, st[u][r]);
        if (best >= kInf) continue;  // currently not appendable anywhere
        double d = P.workload(u);
        order.push_back({d <= 0.0 ? kInf : best / d, u});
      }
      if (order.empty()) break;
      std::sort(order.begin(), order.end(), [](const Scored& a, const Scored& b) {
        return a.rho != b.rho ? a.rho < b.rho : a.id < b.id;
      });
      auto pick = static_cast<std::size_t>(
          std::pow(rng.uniform(), prm.alpha1) * static_cast<double>(order.size()));
      pick = std::min(pick, order.size() - 1);
      int u = order[pick].id;
      int best_r = 0;
      for (int r = 1; r < m; ++r)
        if (st[u][r] < st[u][best_r]) best_r = r;

      Route& route = S.routes[best_r];
      route.seq.push_back(u);
      bool ok = rebuild_route(P, route);
      assert(ok);
      (void)ok;
      U.erase(std::find(U.begin(), U.end(), u));
      for (int x : U) st[x][best_r] = append_cost(route, x);
    }

    S.pool = U;
    recompute_fitness(P, S, prm.eta);
    return S;
  }

  Solution best_initial(Rng& rng) const {
    Solution best;
    bool have = false;
    for (int k = 0; k < std::max(prm.n_init, 1); ++k) {
      Solution s = construct(rng);
      if (!have || compare_fitness(s.fit, best.fit, prm.maximize_mft) > 0) {
        best = std::move(s);
        have = true;
      }
    }
    return best;
  }

  // -------------------------------------------------------- local search --

  Solution local_search(Solution S, int tenure) {
    Solution best = S;
    TabuList tabu(P.n() + 1);
    int iter = 0, stall = 0;
    std::unordered_set<std::uint64_t> seen;  // cycle cut for tenure == 0
    if (tenure == 0) seen.insert(structural_hash(S));

    while (true) {
      if (out_of_time()) break;
      ++iter;
      ++ls_rounds;
      Cand cand = best_move(S, tabu, iter, best.fit, tenure > 0);
      if (!cand.valid) break;
      apply_move(S, cand);
      ++applied_moves;
      if (tenure > 0)
        for (int k = 0; k < cand.n_created; ++k)
          tabu.add(cand.created[k].a, cand.created[k].b, iter + tenure);
      if (compare_fitness(S.fit, best.fit, prm.maximize_mft) > 0) {
        best = S;
        stall = 0;
        if (tenure == 0) {
          seen.clear();
          seen.insert(structural_hash(S));
        }
      } else {
        if (++stall >= prm.max_local_iter) break;
        if (tenure == 0 && !seen.insert(structural_hash(S)).second)
          break;  // deterministic dynamics revisited a state: periodic
      }
    }
    return best;
  }

  // ------------------------------------------------------- ejection pool --

  /// For each unserved supplier: force it in at the position scoring best
  /// on workload-vs-violation, eject members one at a time until feasible,
  /// polish with a tabu-free local search, and adopt any improvement.
  Solution epa(const Solution& S0) {
    Solution best = S0;
    std::vector<int> snapshot = S0.pool;  // ascending
    for (int u : snapshot) {
      if (out_of_time()) break;
      Solution cand = S0;

      // Choose the insertion position over all routes and gaps.
      int ins_r = -1, ins_pos = -1;
      double ins_score = 0.0;
      for (std::size_t r = 0; r < cand.routes.size(); ++r) {
        const Route& route = cand.routes[r];
        for (int pos = 0; pos <= route.size(); ++pos) {
          auto sc = insertion_score(route, u, pos);
          if (!sc) continue;
          bool better;
          if (ins_r < 0)
            better = true;
          else if (prm.epa_insert_max)
            better = *sc > ins_score + kFitnessEps;
          else
            better = *sc < ins_score - kFitnessEps;
          if (better) {
            ins_r = static_cast<int>(r);
            ins_pos = pos;
            ins_score = *sc;
          }
        }
      }
      if (ins_r < 0) continue;  // nowhere to even try

      Route& route = cand.routes[ins_r];
      std::vector<int> seq = route.seq;
      seq.insert(seq.begin() + ins_pos, u);
      cand.pool.erase(std::find(cand.pool.begin(), cand.pool.end(), u));

      // Eject until feasible; never eject u itself.
      bool gave_up = false;
      while (!relaxed_forward(P, seq).feasible()) {
        int eject_idx = -1;
        double eject_score = 0.0;
        std::vector<int> probe;
        for (std::size_t k = 0; k < seq.size(); ++k) {
          if (seq[k] == u) continue;
          probe = seq;
          probe.erase(probe.begin() + static_cast<long>(k));
          RelaxedPass rp = relaxed_forward(P, probe);
          double c = prm.beta3 * P.workload(seq[k]) +
                     prm.beta4 * rp.cap_excess + prm.beta5 * rp.viol;
          if (eject_idx < 0 || c < eject_score - kFitnessEps ||
              (std::abs(c - eject_score) <= kFitnessEps &&
               seq[k] < seq[eject_idx])) {
            eject_idx = static_cast<int>(k);
            eject_score = c;
          }
        }
        if (eject_idx < 0) {
          gave_up = true;  // u alone still infeasible
          break;
        }
        int evicted = seq[eject_idx];
        seq.erase(seq.begin() + eject_idx);
        cand.pool.insert(
            std::lower_bound(cand.pool.begin(), cand.pool.end(), evicted),
            evicted);
      }
      if (gave_up) continue;

      route.seq = std::move(seq);
      bool ok = rebuild_route(P, route);
      assert(ok);
      (void)ok;
      recompute_fitness(P, cand, prm.eta);

      cand = local_search(std::move(cand), 0);
      if (compare_fitness(cand.fit, best.fit, prm.maximize_mft) > 0)
        best = std::move(cand);
    }
    return best;
  }

  // -------------------------------------------------------- perturbation --

  /// Remove served suppliers at probabilities growing with their workload
  /// rank; repetition pressure (n_rep) shifts the whole probability band up.
  void perturb(Solution& S, int n_rep, Rng& rng) const {
    double shift = prm.p_delta * std::min(n_rep, prm.n_max_rep);
    double lo = std::min(1.0, prm.p_min + shift);
    double hi = std::min(1.0, prm.p_max + shift);

    struct Served {
      double d;
      int id;
      int route;
    };
    std::vector<Served> served;
    for (std::size_t r = 0; r < S.routes.size(); ++r)
      for (int v : S.routes[r].seq)
        served.push_back({P.workload(v), v, static_cast<int>(r)});
    std::sort(served.begin(), served.end(), [](const Served& a, const Served& b) {
      return a.d != b.d ? a.d < b.d : a.id < b.id;
    });

    auto n = static_cast<double>(served.size());
    std::vector<char> drop_route(S.routes.size(), 0);
    std::vector<int> dropped;
    for (std::size_t k = 0; k < served.size(); ++k) {
      double p = lo + (hi - lo) * (static_cast<double>(k + 1) / n);
      if (rng.uniform() < p) {
        dropped.push_back(served[k].id);
        drop_route[served[k].route] = 1;
      }
    }
    if (dropped.empty()) return;

    std::vector<char> is_dropped(P.n() + 1, 0);
    for (int v : dropped) is_dropped[v] = 1;
    for (std::size_t r = 0; r < S.routes.size(); ++r) {
      if (!drop_route[r]) continue;
      Route& route = S.routes[r];
      std::erase_if(route.seq, [&](int v) { return is_dropped[v]; });
      bool ok = rebuild_route(P, route);
      assert(ok);  // removing visits keeps a route feasible
      (void)ok;
    }
    S.pool.insert(S.pool.end(), dropped.begin(), dropped.end());
    std::sort(S.pool.begin(), S.pool.end());
    recompute_fitness(P, S, prm.eta);
  }

 private:
  const Problem& P;
  const SearchParams& prm;
  std::optional<Clock::time_point> deadline_;

  // ------------------------------------------------------------- helpers --

  double append_cost(const Route& r, int u) const {
    if (r.wl + P.workload(u) > P.q() + kTimeEps) return kInf;
    int tail = r.empty() ? 0 : r.seq.back();
    double ed_tail = r.empty() ? 0.0 : r.ed.back();
    double leg = P.tt.query(tail, u, ed_tail);
    if (leg >= kInf) return kInf;
    auto ed = extend(P, tail, ed_tail, u);
    if (!ed) return kInf;
    double back = P.tt.query(u, 0, *ed);
    if (back >= kInf || *ed + back > P.horizon() + kTimeEps) return kInf;
    return leg;
  }

  /// Score of force-inserting u after position pos-1 of a feasible route:
  /// workload reward minus violation penalty (relaxed arithmetic, since the
  /// insertion is usually infeasible). nullopt when u cannot even be
  /// reached from the predecessor.
  std::optional<double> insertion_score(const Route& r, int u, int pos) const {
    int pred = pos == 0 ? 0 : r.seq[pos - 1];
    double ed_pred = pos == 0 ? 0.0 : r.ed[pos - 1];
    int succ = pos == r.size() ? 0 : r.seq[pos];
    double l_succ = pos == r.size() ? P.horizon() : P.l(succ);

    double leg = P.tt.query(pred, u, ed_pred);
    if (leg >= kInf) return std::nullopt;
    double ea_u = ed_pred + leg;
    double sa = std::max(ea_u, P.e(u));
    double viol = std::max(0.0, sa - P.l(u));
    double s = P.service(u);
    double start = sa;
    if (sa <= P.horizon() + kTimeEps) {
      double resid = P.grid().ceil_of(sa) - sa;
      if (resid + kTimeEps < s) {
        double pushed = P.grid().ceil_of(sa);
        if (pushed + s <= P.horizon() + kTimeEps) start = pushed;
      }
    }
    double ed_u = start + s;
    double leg2 = ed_u <= P.horizon() + kTimeEps ? P.tt.query(u, succ, ed_u)
                                                 : P.inst.travel[u][succ];
    if (leg2 >= kInf) return std::nullopt;
    viol += std::max(0.0, ed_u + leg2 - l_succ);
    return prm.beta1 * P.workload(u) - prm.beta2 * viol;
  }

  int vtx(const Route& r, int pos) const {
    return pos < 0 || pos >= r.size() ? 0 : r.seq[pos];
  }
  double ed_at(const Route& r, int pos) const {
    return pos < 0 ? 0.0 : r.ed[pos];
  }
  double la_at(const Route& r, int pos) const {
    return pos >= r.size() ? P.horizon() : r.la[pos];
  }

  /// Arrival check at the junction where the new sequence rejoins cached
  /// suffix state: arrival at `succ` (or the depot) must stay below its
  /// cached latest arrival (or the horizon).
  bool junction_ok(int prev, double ed, int succ, double la_succ) const {
    double leg = P.tt.query(prev, succ, ed);
    return leg < kInf && ed + leg <= la_succ + kTimeEps;
  }

  static void note_sup(Cand& c, int v) {
    if (v != 0) c.min_sup = std::min(c.min_sup, v);
  }
  static void add_removed(Cand& c, int a, int b) {
    c.removed[c.n_removed++] = {a, b};
    note_sup(c, a);
    note_sup(c, b);
  }
  static void add_created(Cand& c, int a, int b) {
    c.created[c.n_created++] = {a, b};
    note_sup(c, a);
    note_sup(c, b);
  }

  bool removes_tabu_edge(const Cand& c, const TabuList& tabu, int iter) const {
    for (int k = 0; k < c.n_removed; ++k)
      if (tabu.active(c.removed[k].a, c.removed[k].b, iter)) return true;
    return false;
  }

  /// Tier-1 prune: a move whose new P cannot reach the incumbent candidate
  /// is dead before any propagation work.
  bool p_dead(const Solution& S, const Cand& incumbent, double delta_p) const {
    return incumbent.valid &&
           S.fit.P + delta_p < incumbent.fit.P - kFitnessEps;
  }

  /// Full evaluation: rebuild the changed routes, derive (P, D, F) and
  /// decide against the incumbent candidate and the aspiration rule.
  /// `new_pool` empty means the pool is unchanged.
  void consider(Cand&& c, const Solution& S, std::vector<int>&& seq1,
                std::vector<int>&& seq2, const TabuList& tabu, int iter,
                const Fitness& local_best, bool tabu_enabled, double delta_p,
                Cand& incumbent) {
    // Tier 1: a candidate that cannot reach the incumbent's P is dead, and
    // a tabu candidate that cannot beat the local best cannot aspire.
    double new_p = S.fit.P + delta_p;
    if (incumbent.valid && new_p < incumbent.fit.P - kFitnessEps) return;
    bool tabu_hit = tabu_enabled && removes_tabu_edge(c, tabu, iter);
    if (tabu_hit && new_p < local_best.P - kFitnessEps) return;

    c.nr1.seq = std::move(seq1);
    if (!rebuild_route(P, c.nr1)) return;
    if (c.r2 >= 0) {
      c.nr2.seq = std::move(seq2);
      if (!rebuild_route(P, c.nr2)) return;
    }

    c.fit.P = new_p;
    c.fit.F = S.fit.F - S.routes[c.r1].mft + c.nr1.mft;
    if (c.r2 >= 0) c.fit.F += c.nr2.mft - S.routes[c.r2].mft;
    c.fit.D = candidate_pool_distance(S, c);

    if (tabu_hit &&
        compare_fitness(c.fit, local_best, prm.maximize_mft) <= 0)
      return;  // aspiration failed

    if (incumbent.valid) {
      int cmp = compare_fitness(c.fit, incumbent.fit, prm.maximize_mft);
      if (cmp < 0) return;
      if (cmp == 0) {
        if (c.op != incumbent.op ? c.op > incumbent.op
                                 : c.min_sup >= incumbent.min_sup)
          return;
      }
    }
    c.valid = true;
    incumbent = std::move(c);
  }

  /// D of the candidate solution: cached rows cover unchanged routes; the
  /// changed route(s) and any pool newcomers are evaluated fresh.
  double candidate_pool_distance(const Solution& S, const Cand& c) const {
    const std::vector<int>& pool = c.pool_changed ? c.new_pool : S.pool;
    if (pool.empty()) return 0.0;
    std::vector<double> mins;
    mins.reserve(pool.size());
    for (int u : pool) {
      auto it = std::lower_bound(S.pool.begin(), S.pool.end(), u);
      bool cached = it != S.pool.end() && *it == u;
      std::size_t row = static_cast<std::size_t>(it - S.pool.begin());
      double mn = kInf;
      for (std::size_t r = 0; r < S.routes.size(); ++r) {
        if (static_cast<int>(r) == c.r1 || static_cast<int>(r) == c.r2)
          continue;
        mn = std::min(mn, cached ? S.mv[row][r]
                                 : min_violation(P, S.routes[r], u, prm.eta));
      }
      mn = std::min(mn, min_violation(P, c.nr1, u, prm.eta));
      if (c.r2 >= 0) mn = std::min(mn, min_violation(P, c.nr2, u, prm.eta));
      mins.push_back(mn);
    }
    return pool_distance(std::move(mins));
  }

  void apply_move(Solution& S, Cand& c) const {
    std::vector<int> old_pool = std::move(S.pool);
    std::vector<std::vector<double>> old_mv = std::move(S.mv);

    S.routes[c.r1] = std::move(c.nr1);
    if (c.r2 >= 0) S.routes[c.r2] = std::move(c.nr2);
    // When the pool is unchanged, rows keep their index and old_pool is not
    // needed for lookups, so it can be moved back wholesale.
    if (c.pool_changed)
      S.pool = std::move(c.new_pool);
    else
      S.pool = std::move(old_pool);

    // Refresh the mv matrix: kept rows only need the changed columns
    // recomputed; pool newcomers get a fresh row.
    S.mv.resize(S.pool.size());
    for (std::size_t k = 0; k < S.pool.size(); ++k) {
      int u = S.pool[k];
      std::size_t old_row = old_mv.size();  // sentinel: no previous row
      if (!c.pool_changed) {
        old_row = k;
      } else {
        auto it = std::lower_bound(old_pool.begin(), old_pool.end(), u);
        if (it != old_pool.end() && *it == u)
          old_row = static_cast<std::size_t>(it - old_pool.begin());
      }
      if (old_row < old_mv.size()) {
        S.mv[k] = std::move(old_mv[old_row]);
        S.mv[k][static_cast<std::size_t>(c.r1)] =
            min_violation(P, S.routes[c.r1], u, prm.eta);
        if (c.r2 >= 0)
          S.mv[k][static_cast<std::size_t>(c.r2)] =
              min_violation(P, S.routes[c.r2], u, prm.eta);
      } else {
        S.mv[k].assign(S.routes.size(), kInf);
        for (std::size_t r = 0; r < S.routes.size(); ++r)
          S.mv[k][r] = min_violation(P, S.routes[r], u, prm.eta);
      }
    }
    S.fit = c.fit;
  }

  // ------------------------------------------------- candidate generation --

  Cand best_move(const Solution& S, const TabuList& tabu, int iter,
                 const Fitness& local_best, bool tabu_enabled) {
    Cand best;
    int m = static_cast<int>(S.routes.size());

    auto consider_intra = [&](int op, int r, std::vector<int>&& seq,
                              Cand&& c) {
      c.op = op;
      c.r1 = r;
      consider(std::move(c), S, std::move(seq), {}, tabu, iter, local_best,
               tabu_enabled, 0.0, best);
    };

    // --- 2-opt (intra, segment reversal) ---
    for (int r = 0; r < m && !p_dead(S, best, 0.0); ++r) {
      const Route& route = S.routes[r];
      int L = route.size();
      for (int i = -1; i <= L - 3; ++i) {
        // Propagate the reversed segment incrementally as j grows? The
        // reversal direction changes with j, so propagate per (i, j).
        for (int j = i + 2; j <= L - 1; ++j) {
          double ed = ed_at(route, i);
          int prev = vtx(route, i);
          bool ok = true;
          for (int k = j; k > i && ok; --k) {
            auto next = extend(P, prev, ed, route.seq[k]);
            if (!next)
              ok = false;
            else {
              ed = *next;
              prev = route.seq[k];
            }
          }
          if (!ok || !junction_ok(prev, ed, vtx(route, j + 1), la_at(route, j + 1)))
            continue;

          Cand c;
          add_removed(c, vtx(route, i), route.seq[i + 1]);
          add_removed(c, route.seq[j], vtx(route, j + 1));
          add_created(c, vtx(route, i), route.seq[j]);
          add_created(c, route.seq[i + 1], vtx(route, j + 1));

          std::vector<int> seq(route.seq);
          std::reverse(seq.begin() + (i + 1), seq.begin() + (j + 1));
          consider_intra(0, r, std::move(seq), std::move(c));
        }
      }
    }

    // --- Or-opt (intra, move a 2-visit segment) ---
    for (int r = 0; r < m && !p_dead(S, best, 0.0); ++r) {
      const Route& route = S.routes[r];
      int L = route.size();
      for (int i = 0; i + 1 <= L - 1; ++i) {
        for (int j = -1; j <= L - 1; ++j) {
          if (j >= i - 1 && j <= i + 1) continue;
          std::vector<int> seq;
          seq.reserve(L);
          int junction_old_pos;
          int start_old_pos;  // first changed original position
          if (j < i - 1) {
            for (int k = 0; k <= j; ++k) seq.push_back(route.seq[k]);
            seq.push_back(route.seq[i]);
            seq.push_back(route.seq[i + 1]);
            for (int k = j + 1; k <= i - 1; ++k) seq.push_back(route.seq[k]);
            for (int k = i + 2; k <= L - 1; ++k) seq.push_back(route.seq[k]);
            start_old_pos = j;
            junction_old_pos = i + 2;
          } else {
            for (int k = 0; k <= i - 1; ++k) seq.push_back(route.seq[k]);
            for (int k = i + 2; k <= j; ++k) seq.push_back(route.seq[k]);
            seq.push_back(route.seq[i]);
            seq.push_back(route.seq[i + 1]);
            for (int k = j + 1; k <= L - 1; ++k) seq.push_back(route.seq[k]);
            start_old_pos = i - 1;
            junction_old_pos = j + 1;
          }
          // Propagate the changed middle, then check the junction. The
          // edited block keeps its length, so new-seq positions
          // [start_old_pos + 1, junction_old_pos) cover exactly the edit.
          double ed = ed_at(route, start_old_pos);
          int prev = vtx(route, start_old_pos);
          bool ok = true;
          int changed_from = start_old_pos + 1;
          int changed_to = junction_old_pos;
          for (int k = changed_from; k < changed_to && ok; ++k) {
            auto next = extend(P, prev, ed, seq[static_cast<std::size_t>(k)]);
            if (!next)
              ok = false;
            else {
              ed = *next;
              prev = seq[static_cast<std::size_t>(k)];
            }
          }
          if (!ok ||
              !junction_ok(prev, ed, vtx(route, junction_old_pos),
                           la_at(route, junction_old_pos)))
            continue;

          Cand c;
          add_removed(c, vtx(route, i - 1), route.seq[i]);
          add_removed(c, route.seq[i + 1], vtx(route, i + 2));
          add_removed(c, vtx(route, j), vtx(route, j + 1));
          add_created(c, vtx(route, i - 1), vtx(route, i + 2));
          add_created(c, vtx(route, j), route.seq[i]);
          add_created(c, route.seq[i + 1], vtx(route, j + 1));
          consider_intra(1, r, std::move(seq), std::move(c));
        }
      }
    }

    // --- 2-opt* (inter, tail swap) ---
    for (int r1 = 0; r1 < m && !p_dead(S, best, 0.0); ++r1) {
      for (int r2 = r1 + 1; r2 < m; ++r2) {
        const Route& A = S.routes[r1];
        const Route& B = S.routes[r2];
        int LA = A.size(), LB = B.size();
        for (int i = -1; i <= LA - 1; ++i) {
          for (int j = -1; j <= LB - 1; ++j) {
            if (i == LA - 1 && j == LB - 1) continue;  // swap of nothing
            if (i == -1 && j == -1) continue;          // full-route relabel
            double wa = A.wl_pre[i + 1] + (B.wl - B.wl_pre[j + 1]);
            double wb = B.wl_pre[j + 1] + (A.wl - A.wl_pre[i + 1]);
            if (wa > P.q() + kTimeEps || wb > P.q() + kTimeEps) continue;
            if (!junction_ok(vtx(A, i), ed_at(A, i), vtx(B, j + 1),
                             la_at(B, j + 1)))
              continue;
            if (!junction_ok(vtx(B, j), ed_at(B, j), vtx(A, i + 1),
                             la_at(A, i + 1)))
              continue;

            Cand c;
            c.op = 2;
            c.r1 = r1;
            c.r2 = r2;
            add_removed(c, vtx(A, i), vtx(A, i + 1));
            add_removed(c, vtx(B, j), vtx(B, j + 1));
            add_created(c, vtx(A, i), vtx(B, j + 1));
            add_created(c, vtx(B, j), vtx(A, i + 1));

            std::vector<int> sa(A.seq.begin(), A.seq.begin() + (i + 1));
            sa.insert(sa.end(), B.seq.begin() + (j + 1), B.seq.end());
            std::vector<int> sb(B.seq.begin(), B.seq.begin() + (j + 1));
            sb.insert(sb.end(), A.seq.begin() + (i + 1), A.seq.end());
            consider(std::move(c), S, std::move(sa), std::move(sb), tabu,
                     iter, local_best, tabu_enabled, 0.0, best);
          }
        }
      }
    }

    // --- Relocate ---
    relocate_moves(S, tabu, iter, local_best, tabu_enabled, best);

    // --- Exchange ---
    exchange_moves(S, tabu, iter, local_best, tabu_enabled, best);

    return best;
  }

  void relocate_moves(const Solution& S, const TabuList& tabu, int iter,
                      const Fitness& local_best, bool tabu_enabled,
                      Cand& best) {
    int m = static_cast<int>(S.routes.size());

    // Intra reinsertion.
    for (int r = 0; r < m && !p_dead(S, best, 0.0); ++r) {
      const Route& route = S.routes[r];
      int L = route.size();
      for (int a = 0; a < L; ++a) {
        for (int j = -1; j <= L - 1; ++j) {
          if (j == a || j == a - 1) continue;
          std::vector<int> seq;
          seq.reserve(L);
          int start_old_pos, junction_old_pos;
          if (j < a - 1) {
            for (int k = 0; k <= j; ++k) seq.push_back(route.seq[k]);
            seq.push_back(route.seq[a]);
            for (int k = j + 1; k <= a - 1; ++k) seq.push_back(route.seq[k]);
            for (int k = a + 1; k <= L - 1; ++k) seq.push_back(route.seq[k]);
            start_old_pos = j;
            junction_old_pos = a + 1;
          } else {
            for (int k = 0; k <= a - 1; ++k) seq.push_back(route.seq[k]);
            for (int k = a + 1; k <= j; ++k) seq.push_back(route.seq[k]);
            seq.push_back(route.seq[a]);
            for (int k = j + 1; k <= L - 1; ++k) seq.push_back(route.seq[k]);
            start_old_pos = a - 1;
            junction_old_pos = j + 1;
          }
          double ed = ed_at(route, start_old_pos);
          int prev = vtx(route, start_old_pos);
          bool ok = true;
          int edit_len = j < a - 1 ? (a - j) : (j - a + 1);
          int changed_from = start_old_pos + 1;
          for (int k = 0; k < edit_len && ok; ++k) {
            int v = seq[static_cast<std::size_t>(changed_from + k)];
            auto next = extend(P, prev, ed, v);
            if (!next)
              ok = false;
            else {
              ed = *next;
              prev = v;
            }
          }
          if (!ok ||
              !junction_ok(prev, ed, vtx(route, junction_old_pos),
                           la_at(route, junction_old_pos)))
            continue;

          Cand c;
          add_removed(c, vtx(route, a - 1), route.seq[a]);
          add_removed(c, route.seq[a], vtx(route, a + 1));
          add_removed(c, vtx(route, j), vtx(route, j + 1));
          add_created(c, vtx(route, a - 1), vtx(route, a + 1));
          add_created(c, vtx(route, j), route.seq[a]);
          add_created(c, route.seq[a], vtx(route, j + 1));
          c.op = 3;
          c.r1 = r;
          consider(std::move(c), S, std::move(seq), {}, tabu, iter,
                   local_best, tabu_enabled, 0.0, best);
        }
      }
    }

    // Inter route -> route.
    for (int r1 = 0; r1 < m && !p_dead(S, best, 0.0); ++r1) {
      const Route& A = S.routes[r1];
      for (int a = 0; a < A.size(); ++a) {
        int u = A.seq[a];
        for (int r2 = 0; r2 < m; ++r2) {
          if (r2 == r1) continue;
          const Route& B = S.routes[r2];
          if (B.wl + P.workload(u) > P.q() + kTimeEps) continue;
          for (int j = -1; j <= B.size() - 1; ++j) {
            auto ed_u = extend(P, vtx(B, j), ed_at(B, j), u);
            if (!ed_u) continue;
            if (!junction_ok(u, *ed_u, vtx(B, j + 1), la_at(B, j + 1)))
              continue;

            Cand c;
            add_removed(c, vtx(A, a - 1), u);
            add_removed(c, u, vtx(A, a + 1));
            add_removed(c, vtx(B, j), vtx(B, j + 1));
            add_created(c, vtx(A, a - 1), vtx(A, a + 1));
            add_created(c, vtx(B, j), u);
            add_created(c, u, vtx(B, j + 1));
            c.op = 3;
            c.r1 = r1;
            c.r2 = r2;
            std::vector<int> sa(A.seq);
            sa.erase(sa.begin() + a);
            std::vector<int> sb(B.seq);
            sb.insert(sb.begin() + (j + 1), u);
            consider(std::move(c), S, std::move(sa), std::move(sb), tabu,
                     iter, local_best, tabu_enabled, 0.0, best);
          }
        }
      }
    }

    // Route -> pool (drop a visit).
    for (int r = 0; r < m; ++r) {
      const Route& A = S.routes[r];
      for (int a = 0; a < A.size(); ++a) {
        int u = A.seq[a];
        if (p_dead(S, best, -P.workload(u))) continue;
        Cand c;
        add_removed(c, vtx(A, a - 1), u);
        add_removed(c, u, vtx(A, a + 1));
        add_created(c, vtx(A, a - 1), vtx(A, a + 1));
        c.op = 3;
        c.r1 = r;
        c.pool_changed = true;
        c.new_pool = S.pool;
        c.new_pool.insert(
            std::lower_bound(c.new_pool.begin(), c.new_pool.end(), u), u);
        std::vector<int> sa(A.seq);
        sa.erase(sa.begin() + a);
        consider(std::move(c), S, std::move(sa), {}, tabu, iter, local_best,
                 tabu_enabled, -P.workload(u), best);
      }
    }

    // Pool -> route (insert an unserved supplier).
    for (int u : S.pool) {
      if (p_dead(S, best, P.workload(u))) continue;
      for (int r = 0; r < m; ++r) {
        const Route& B = S.routes[r];
        if (B.wl + P.workload(u) > P.q() + kTimeEps) continue;
        for (int j = -1; j <= B.size() - 1; ++j) {
          auto ed_u = extend(P, vtx(B, j), ed_at(B, j), u);
          if (!ed_u) continue;
          if (!junction_ok(u, *ed_u, vtx(B, j + 1), la_at(B, j + 1))) continue;

          Cand c;
          add_removed(c, vtx(B, j), vtx(B, j + 1));
          add_created(c, vtx(B, j), u);
          add_created(c, u, vtx(B, j + 1));
          c.op = 3;
          c.r1 = r;
          c.pool_changed = true;
          c.new_pool = S.pool;
          c.new_pool.erase(
              std::find(c.new_pool.begin(), c.new_pool.end(), u));
          std::vector<int> sb(B.seq);
          sb.insert(sb.begin() + (j + 1), u);
          consider(std::move(c), S, std::move(sb), {}, tabu, iter, local_best,
                   tabu_enabled, P.workload(u), best);
        }
      }
    }
  }

  void exchange_moves(const Solution& S, const TabuList& tabu, int iter,
                      const Fitness& local_best, bool tabu_enabled,
                      Cand& best) {
    int m = static_cast<int>(S.routes.size());

    // Intra swap.
    for (int r = 0; r < m && !p_dead(S, best, 0.0); ++r) {
      const Route& route = S.routes[r];
      int L = route.size();
      for (int a = 0; a < L; ++a) {
        for (int b = a + 1; b < L; ++b) {
          std::vector<int> seq(route.seq);
          std::swap(seq[a], seq[b]);
          double ed = ed_at(route, a - 1);
          int prev = vtx(route, a - 1);
          bool ok = true;
          for (int k = a; k <= b && ok; ++k) {
            auto next = extend(P, prev, ed, seq[static_cast<std::size_t>(k)]);
            if (!next)
              ok = false;
            else {
              ed = *next;
              prev = seq[static_cast<std::size_t>(k)];
            }
          }
          if (!ok || !junction_ok(prev, ed, vtx(route, b + 1), la_at(route, b + 1)))
            continue;

          Cand c;
          int u = route.seq[a], v = route.seq[b];
          if (b == a + 1) {
            add_removed(c, vtx(route, a - 1), u);
            add_removed(c, u, v);
            add_removed(c, v, vtx(route, b + 1));
            add_created(c, vtx(route, a - 1), v);
            add_created(c, v, u);
            add_created(c, u, vtx(route, b + 1));
          } else {
            add_removed(c, vtx(route, a - 1), u);
            add_removed(c, u, vtx(route, a + 1));
            add_removed(c, vtx(route, b - 1), v);
            add_removed(c, v, vtx(route, b + 1));
            add_created(c, vtx(route, a - 1), v);
            add_created(c, v, vtx(route, a + 1));
            add_created(c, vtx(route, b - 1), u);
            add_created(c, u, vtx(route, b + 1));
          }
          c.op = 4;
          c.r1 = r;
          consider(std::move(c), S, std::move(seq), {}, tabu, iter,
                   local_best, tabu_enabled, 0.0, best);
        }
      }
    }

    // Inter swap.
    for (int r1 = 0; r1 < m && !p_dead(S, best, 0.0); ++r1) {
      for (int r2 = r1 + 1; r2 < m; ++r2) {
        const Route& A = S.routes[r1];
        const Route& B = S.routes[r2];
        for (int a = 0; a < A.size(); ++a) {
          int u = A.seq[a];
          for (int b = 0; b < B.size(); ++b) {
            int v = B.seq[b];
            if (A.wl - P.workload(u) + P.workload(v) > P.q() + kTimeEps)
              continue;
            if (B.wl - P.workload(v) + P.workload(u) > P.q() + kTimeEps)
              continue;
            auto ed_v = extend(P, vtx(A, a - 1), ed_at(A, a - 1), v);
            if (!ed_v || !junction_ok(v, *ed_v, vtx(A, a + 1), la_at(A, a + 1)))
              continue;
            auto ed_u = extend(P, vtx(B, b - 1), ed_at(B, b - 1), u);
            if (!ed_u || !junction_ok(u, *ed_u, vtx(B, b + 1), la_at(B, b + 1)))
              continue;

            Cand c;
            add_removed(c, vtx(A, a - 1), u);
            add_removed(c, u, vtx(A, a + 1));
            add_removed(c, vtx(B, b - 1), v);
            add_removed(c, v, vtx(B, b + 1));
            add_created(c, vtx(A, a - 1), v);
            add_created(c, v, vtx(A, a + 1));
            add_created(c, vtx(B, b - 1), u);
            add_created(c, u, vtx(B, b + 1));
            c.op = 4;
            c.r1 = r1;
            c.r2 = r2;
            std::vector<int> sa(A.seq);
            sa[static_cast<std::size_t>(a)] = v;
            std::vector<int> sb(B.seq);
            sb[static_cast<std::size_t>(b)] = u;
            consider(std::move(c), S, std::move(sa), std::move(sb), tabu,
                     iter, local_best, tabu_enabled, 0.0, best);
          }
        }
      }
    }

    // Route <-> pool swap.
    for (int r = 0; r < m; ++r) {
      const Route& A = S.routes[r];
      for (int a = 0; a < A.size(); ++a) {
        int u = A.seq[a];
        for (int v : S.pool) {
          if (p_dead(S, best, P.workload(v) - P.workload(u))) continue;
          if (A.wl - P.workload(u) + P.workload(v) > P.q() + kTimeEps)
            continue;
          auto ed_v = extend(P, vtx(A, a - 1), ed_at(A, a - 1), v);
          if (!ed_v || !junction_ok(v, *ed_v, vtx(A, a + 1), la_at(A, a + 1)))
            continue;

          Cand c;
          add_removed(c, vtx(A, a - 1), u);
          add_removed(c, u, vtx(A, a + 1));
          add_created(c, vtx(A, a - 1), v);
          add_created(c, v, vtx(A, a + 1));
          c.op = 4;
          c.r1 = r;
          c.pool_changed = true;
          c.new_pool = S.pool;
          c.new_pool.erase(std::find(c.new_pool.begin(), c.new_pool.end(), v));
          c.new_pool.insert(
              std::lower_bound(c.new_pool.begin(), c.new_pool.end(), u), u);
          std::vector<int> sa(A.seq);
          sa[static_cast<std::size_t>(a)] = v;
          consider(std::move(c), S, std::move(sa), {}, tabu, iter, local_best,
                   tabu_enabled, P.workload(v) - P.workload(u), best);
        }
      }
    }
  }
};

}  // namespace detail

/// One randomized construction (exposed for tests).
inline Solution initial_solution(const Problem& P, const SearchParams& prm,
                                 Rng& rng) {
  return detail::Searcher(P, prm).construct(rng);
}

/// Tabu-guided steepest local search (exposed for tests); tenure 0 runs
/// plain steepest moves with a cycle cut.
inline Solution local_search(const Problem& P, const SearchParams& prm,
                             Solution S, int tenure) {
  return detail::Searcher(P, prm).local_search(std::move(S), tenure);
}

inline Solution epa_pass(const Problem& P, const SearchParams& prm,
                         const Solution& S) {
  return detail::Searcher(P, prm).epa(S);
}

inline void perturb(const Problem& P, const SearchParams& prm, Solution& S,
                    int n_rep, Rng& rng) {
  detail::Searcher(P, prm).perturb(S, n_rep, rng);
}

/// Full metaheuristic: randomized construction, then rounds of tabu local
/// search + ejection-pool repair, perturbing between rounds, until the
/// improvement counter, the target, or the time budget stops it.
inline SearchResult tabu_search(const Problem& P, const SearchParams& prm,
                                std::uint64_t seed) {
  using detail::Clock;
  auto t0 = Clock::now();
  std::optional<Clock::time_point> deadline;
  if (prm.time_limit_ms > 0)
    deadline = t0 + std::chrono::milliseconds(prm.time_limit_ms);

  detail::Searcher searcher(P, prm, deadline);
  Rng rng(seed);
  SearchResult res;

  Solution S = searcher.best_initial(rng);
  Solution best = S;
  std::vector<Fitness> log;
  int counter = 0;
  int iter = 0;

  auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  };

  while (true) {
    ++iter;
    if (prm.use_ls) S = searcher.local_search(std::move(S), prm.tenure);
    if (prm.use_ep) S = searcher.epa(S);

    bool improved = compare_fitness(S.fit, best.fit, prm.maximize_mft) > 0;
    if (improved) {
      best = S;
      counter = 0;
    } else {
      ++counter;
    }
    res.trace.push_back({iter, S.fit, best.fit,
                         static_cast<int>(S.pool.size()), elapsed()});

    if (best.fit.P >= prm.target_p - kFitnessEps) break;
    if (counter >= prm.max_perturbation) break;
    if (searcher.out_of_time()) break;

    int n_rep = 0;
    for (const Fitness& f : log)
      if (fitness_equal(f, S.fit)) ++n_rep;
    log.push_back(S.fit);

    if (prm.use_per) {
      searcher.perturb(S, n_rep, rng);
    } else if (!improved) {
      break;  // without perturbation the next round would repeat exactly
    }
  }

  res.best = std::move(best);
  res.iterations = iter;
  res.seconds = elapsed();
  res.ls_rounds = searcher.ls_rounds;
  res.applied_moves = searcher.applied_moves;
  return res;
}

}  // namespace mpisp
