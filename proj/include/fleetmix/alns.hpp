#pragma once

// Adaptive large neighborhood search for one operational scenario: destroy
// and repair operators chosen by adaptive roulette, simulated-annealing
// acceptance, segment-based weight updates, and a reset-to-best mechanism.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "fleetmix/energy.hpp"
#include "fleetmix/eval.hpp"
#include "fleetmix/model.hpp"
#include "fleetmix/rng.hpp"

namespace fleetmix::alns {

struct Params {
  double cooling = 0.9999;            // per-iteration temperature factor
  double start_temp_factor = 0.015;   // relative worsening accepted at 50%
  double removal_min = 0.05;          // fraction of routed customers
  double removal_max = 0.35;
  int segment = 125;                  // iterations between weight updates
  int reset_threshold = 5000;         // non-improving iterations before reset
  double reaction = 0.1;              // weight smoothing factor
  double reward_best = 33.0;          // new global best
  double reward_better = 9.0;         // improved on the current solution
  double reward_fresh = 13.0;         // accepted and never seen before
  double p_worst = 4.0;               // worst-removal rank randomization
  double shaw_distance = 9.0;
  double shaw_time = 3.0;             // shared by arrival and window terms
  double shaw_demand = 2.0;
  double shaw_same_route = 5.0;
  double p_shaw = 4.0;
  double sisr_avg_removed = 10.0;     // target removed customers per call
  int sisr_max_string = 10;           // longest removable string
  double sisr_keep_stop = 0.01;       // chance the preserved block stops growing
  double blink_rate = 0.0;            // chance a repair skips a candidate route
  long iterations = 25000;
  double time_limit_s = 30.0;         // 0 disables the wall clock
  std::uint64_t seed = 0;

  void validate() const {
    if (!(cooling > 0.0 && cooling < 1.0))
      throw ConfigError("cooling factor must lie in (0, 1)");
    if (!(removal_min > 0.0 && removal_min <= removal_max && removal_max <= 1.0))
      throw ConfigError("removal fractions need 0 < min <= max <= 1");
    if (reward_best < 0.0 || reward_better < 0.0 || reward_fresh < 0.0)
      throw ConfigError("operator rewards must be non-negative");
    if (segment < 1) throw ConfigError("segment size must be at least 1");
    if (reset_threshold < 1) throw ConfigError("reset threshold must be at least 1");
    if (!(reaction >= 0.0 && reaction <= 1.0))
      throw ConfigError("reaction factor must lie in [0, 1]");
    if (start_temp_factor < 0.0)
      throw ConfigError("start temperature factor must be non-negative");
    if (p_worst < 0.0 || p_shaw < 0.0)
      throw ConfigError("rank randomization exponents must be non-negative");
    if (sisr_avg_removed <= 0.0 || sisr_max_string < 1)
      throw ConfigError("string removal needs a positive size target");
    if (!(sisr_keep_stop >= 0.0 && sisr_keep_stop <= 1.0))
      throw ConfigError("preserved-string stop probability must lie in [0, 1]");
    if (!(blink_rate >= 0.0 && blink_rate < 1.0))
      throw ConfigError("blink rate must lie in [0, 1)");
    if (iterations < 0) throw ConfigError("iteration budget must be non-negative");
  }
};

// Temperature at which a solution worse by s * initial_cost survives the
// exp(-delta/T) coin with probability one half.
inline double start_temperature(double initial_cost, double s) {
  if (initial_cost <= 0.0)
    throw std::domain_error("start temperature needs a positive initial cost");
  if (s < 0.0) throw std::domain_error("start temperature factor must be non-negative");
  return -s * initial_cost / std::log(0.5);
}

struct OperatorStats {
  std::string name;
  double weight = 1.0;
  double score = 0.0;
  int uses = 0;
};

struct OperatorBank {
  std::vector<OperatorStats> destroy;
  std::vector<OperatorStats> repair;

  static OperatorBank standard() {
    OperatorBank b;
    b.destroy = {{"random"}, {"worst"}, {"shaw"}, {"random_route"}, {"sisr"}};
    b.repair = {{"greedy"}, {"regret2"}};
    return b;
  }
};

// Segment update: operators used this segment move toward score/uses, the
// rest keep their weight. Scores and counts restart for the next segment.
inline void adapt_weights(OperatorBank& bank, double reaction) {
  auto update = [reaction](std::vector<OperatorStats>& ops) {
    for (OperatorStats& op : ops) {
      if (op.uses > 0)
        op.weight = op.weight * (1.0 - reaction) + reaction * op.score / op.uses;
      op.score = 0.0;
      op.uses = 0;
    }
  };
  update(bank.destroy);
  update(bank.repair);
}

// Mutable search position: feasible routes with cached totals, plus the
// customers currently left unserved. `total` includes their penalties.
struct SearchState {
  std::vector<Route> routes;
  std::vector<double> route_totals;
  std::vector<int> unserved;
  double total = 0.0;
};

struct IterationEvent {
  long iteration = 0;
  double temperature = 0.0;
  int destroy_op = -1;
  int repair_op = -1;
  bool accepted = false;
  bool new_best = false;
  double candidate_cost = 0.0;
  double current_cost = 0.0;
  double best_cost = 0.0;
  const Solution* candidate = nullptr;  // valid only during the callback
};
using Observer = std::function<void(const IterationEvent&)>;

// Per-scenario solver context: owns the evaluator, the fleet bookkeeping and
// the destroy/repair operators. One Workspace per thread.
class Workspace {
 public:
  Workspace(const Instance& inst, const FleetMix& mix, const Scenario& sc,
            const energy::PowerContext& ctx, const Params& params,
            double reserve_soc_fraction = 0.0)
      : inst_(inst), p_(params), ev_(inst, sc, ctx, reserve_soc_fraction), mix_(mix) {
    mix_.membership.resize(inst.vehicles.size(), 0);
    selected_ = mix_.selected();
    for (int v : selected_)
      if (v < 0 || v >= static_cast<int>(inst.vehicles.size()))
        throw ConfigError("fleet selects unknown vehicle " + std::to_string(v));
    for (int c : inst.customers)
      if (ev_.realized(c)) realized_.push_back(c);

    // Group interchangeable vehicles; insertions open at most one candidate
    // per group, which keeps the neighborhood small without losing plans.
    for (int v : selected_) {
      bool placed = false;
      for (auto& cls : classes_)
        if (same_class(cls.front(), v)) {
          cls.push_back(v);
          placed = true;
          break;
        }
      if (!placed) classes_.push_back({v});
    }
    class_empty_total_.reserve(classes_.size());
    for (auto& cls : classes_) {
      std::sort(cls.begin(), cls.end());
      class_empty_total_.push_back(ev_.route_cost(empty_route(cls.front())).total());
    }

    horizon_ = std::max(1e-9, inst.nodes[static_cast<std::size_t>(inst.depot_end)].tw_late -
                                  inst.nodes[static_cast<std::size_t>(inst.depot_start)].tw_early);
    double dmax = 0.0, qmin = 0.0, qmax = 0.0, twmax = 0.0;
    bool first = true;
    for (std::size_t a = 0; a < realized_.size(); ++a) {
      const double qa = ev_.demand_units(realized_[a]);
      if (first || qa < qmin) qmin = qa;
      if (first || qa > qmax) qmax = qa;
      first = false;
      for (std::size_t b = a + 1; b < realized_.size(); ++b) {
        dmax = std::max(dmax, proximity(realized_[a], realized_[b]));
        twmax = std::max(twmax, window_gap(realized_[a], realized_[b]));
      }
    }
    shaw_dist_norm_ = dmax > 0.0 ? 1.0 / dmax : 0.0;
    shaw_demand_norm_ = qmax > qmin ? 1.0 / (qmax - qmin) : 0.0;
    shaw_window_norm_ = twmax > 0.0 ? 1.0 / twmax : 0.0;
  }

  const eval::Evaluator& evaluator() const { return ev_; }
  const std::vector<int>& realized_customers() const { return realized_; }
  bool fleet_empty() const { return selected_.empty(); }

  int routed_count(const SearchState& s) const {
    int n = 0;
    for (const Route& r : s.routes) n += customer_count(r.sequence);
    return n;
  }

  Solution to_solution(const SearchState& s) const {
    Solution sol;
    sol.routes = s.routes;
    sol.unserved = s.unserved;
    sol.sort_canonical();
    sol.cost = ev_.evaluate_solution(sol, mix_).cost;
    return sol;
  }

  // Greedy construction: realized customers in shuffled order, each placed at
  // its cheapest feasible position if that beats paying the penalty.
  SearchState construct(Rng& rng) const {
    SearchState s;
    std::vector<int> order = realized_;
    rng.shuffle(order);
    for (int c : order) {
      const auto plan = best_insertion(s, c);
      if (plan && plan->delta < penalty_of(c)) {
        apply_insertion(s, *plan);
      } else {
        s.unserved.push_back(c);
      }
    }
    std::sort(s.unserved.begin(), s.unserved.end());
    refresh_total(s);
    return s;
  }

  // Multiset fingerprint of a plan: rounded cost plus the per-route hashes in
  // a route-order-independent combination.
  std::uint64_t fingerprint(const SearchState& s) const {
    std::uint64_t x =
        0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(std::llround(s.total * 1e6));
    std::uint64_t h = detail::splitmix64(x);
    hash_buf_.clear();
    for (const Route& r : s.routes) {
      std::uint64_t rh = 1469598103934665603ULL;
      auto mixin = [&rh](std::uint64_t v) {
        rh ^= v;
        rh *= 1099511628211ULL;
      };
      mixin(static_cast<std::uint64_t>(r.vehicle));
      for (int nd : r.sequence) mixin(static_cast<std::uint64_t>(nd) + 0x51ULL);
      hash_buf_.push_back(rh);
    }
    std::sort(hash_buf_.begin(), hash_buf_.end());
    for (std::uint64_t rh : hash_buf_) {
      std::uint64_t t = h ^ rh;
      h = detail::splitmix64(t);
    }
    return h;
  }

  // ---- destroy operators --------------------------------------------------

  std::vector<int> destroy_random(SearchState& s, int count, Rng& rng) const {
    std::vector<std::pair<int, int>> routed = routed_index(s);
    std::vector<int> removed;
    const std::size_t take =
        std::min<std::size_t>(static_cast<std::size_t>(std::max(0, count)), routed.size());
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.bounded(routed.size() - i));
      std::swap(routed[i], routed[j]);
      removed.push_back(routed[i].second);
    }
    detach(s, removed);
    return removed;
  }

  std::vector<int> destroy_worst(SearchState& s, int count, Rng& rng) const {
    std::vector<int> removed;
    struct Gain {
      double saving;
      int route;
      int node;
    };
    std::vector<Gain> gains;
    for (int step = 0; step < count; ++step) {
      gains.clear();
      for (std::size_t k = 0; k < s.routes.size(); ++k) {
        const Route& r = s.routes[k];
        for (std::size_t p = 1; p + 1 < r.sequence.size(); ++p) {
          const int nd = r.sequence[p];
          if (node(nd).kind != NodeKind::customer) continue;
          scratch_ = r.sequence;
          scratch_.erase(scratch_.begin() + static_cast<std::ptrdiff_t>(p));
          const eval::RouteCost after = ev_.planned_cost(r.vehicle, scratch_);
          const double saving = after.feasible ? s.route_totals[k] - after.total() : 0.0;
          gains.push_back({saving, static_cast<int>(k), nd});
        }
      }
      if (gains.empty()) break;
      std::stable_sort(gains.begin(), gains.end(),
                       [](const Gain& a, const Gain& b) { return a.saving > b.saving; });
      const auto pick = static_cast<std::size_t>(
          std::pow(rng.uniform(), p_.p_worst) * static_cast<double>(gains.size()));
      const Gain& g = gains[std::min(pick, gains.size() - 1)];
      Route& r = s.routes[static_cast<std::size_t>(g.route)];
      r.sequence.erase(std::find(r.sequence.begin(), r.sequence.end(), g.node));
      removed.push_back(g.node);
      settle_route(s, static_cast<std::size_t>(g.route), removed);
    }
    refresh_total(s);
    return removed;
  }

  std::vector<int> destroy_shaw(SearchState& s, int count, Rng& rng) const {
    std::vector<std::pair<int, int>> routed = routed_index(s);
    if (routed.empty()) return {};

    // Snapshot arrivals and route ids before anything is detached.
    std::vector<double> arrival(inst_.nodes.size(), 0.0);
    std::vector<int> route_of(inst_.nodes.size(), -1);
    for (std::size_t k = 0; k < s.routes.size(); ++k) {
      const eval::RouteEvaluation re = ev_.evaluate_route(s.routes[k]);
      for (const auto& vs : re.states) {
        arrival[static_cast<std::size_t>(vs.node)] = vs.arrival_min;
        route_of[static_cast<std::size_t>(vs.node)] = static_cast<int>(k);
      }
    }

    std::vector<int> chosen;
    chosen.push_back(routed[static_cast<std::size_t>(rng.bounded(routed.size()))].second);
    std::vector<std::pair<double, int>> ranked;
    while (static_cast<int>(chosen.size()) < count && chosen.size() < routed.size()) {
      const int ref = chosen[static_cast<std::size_t>(rng.bounded(chosen.size()))];
      ranked.clear();
      for (const auto& [rk, nd] : routed) {
        (void)rk;
        if (std::find(chosen.begin(), chosen.end(), nd) != chosen.end()) continue;
        ranked.push_back({relatedness(ref, nd, arrival, route_of), nd});
      }
      if (ranked.empty()) break;
      std::stable_sort(ranked.begin(), ranked.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      const auto pick = static_cast<std::size_t>(
          std::pow(rng.uniform(), p_.p_shaw) * static_cast<double>(ranked.size()));
      chosen.push_back(ranked[std::min(pick, ranked.size() - 1)].second);
    }
    detach(s, chosen);
    return chosen;
  }

  std::vector<int> destroy_random_route(SearchState& s, int count, Rng& rng) const {
    std::vector<int> removed;
    while (static_cast<int>(removed.size()) < count && !s.routes.empty()) {
      const std::size_t k = static_cast<std::size_t>(rng.bounded(s.routes.size()));
      for (int nd : s.routes[k].sequence)
        if (node(nd).kind == NodeKind::customer) removed.push_back(nd);
      erase_route(s, k);
    }
    refresh_total(s);
    return removed;
  }

  // String removal: ruins whole contiguous (or split) segments of the tours
  // closest to a random seed customer.
  std::vector<int> destroy_sisr(SearchState& s, Rng& rng) const {
    std::vector<std::pair<int, int>> routed = routed_index(s);
    if (routed.empty()) return {};

    double avg_card = 0.0;
    int tours = 0;
    for (const Route& r : s.routes) {
      const int c = customer_count(r.sequence);
      if (c > 0) {
        avg_card += c;
        tours++;
      }
    }
    avg_card /= std::max(1, tours);
    const int l_cap = std::max(1, std::min(p_.sisr_max_string, static_cast<int>(avg_card)));
    const int k_cap =
        std::max(1, static_cast<int>(4.0 * p_.sisr_avg_removed / (1.0 + l_cap) - 1.0));
    const int strings = 1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(k_cap)));

    const int seed = routed[static_cast<std::size_t>(rng.bounded(routed.size()))].second;
    std::vector<std::pair<double, std::pair<int, int>>> order;
    for (const auto& rc : routed) order.push_back({proximity(seed, rc.second), rc});
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<std::uint8_t> ruined(s.routes.size(), 0);
    std::vector<int> removed;
    int done = 0;
    for (const auto& [d, rc] : order) {
      (void)d;
      if (done >= strings) break;
      const auto [k, nd] = rc;
      if (ruined[static_cast<std::size_t>(k)]) continue;
      ruined[static_cast<std::size_t>(k)] = 1;
      done++;
      remove_string(s.routes[static_cast<std::size_t>(k)], nd, l_cap, rng, removed);
    }
    std::vector<int> dump;
    refresh_routes(s, dump);
    removed.insert(removed.end(), dump.begin(), dump.end());
    refresh_total(s);
    return removed;
  }

  // ---- repair operators ---------------------------------------------------

  void repair_greedy(SearchState& s, std::vector<int> pool, Rng& rng) const {
    repair_core(s, std::move(pool), rng, false);
  }

  void repair_regret2(SearchState& s, std::vector<int> pool, Rng& rng) const {
    repair_core(s, std::move(pool), rng, true);
  }

  // Cheapest way to add one customer: best position in an existing route, or
  // the first vehicle of an unused group. Delta is against the whole plan.
  struct InsertionPlan {
    double delta = 0.0;
    int route_index = -1;  // -1 opens the carried route as a new one
    Route route;
  };

  std::optional<InsertionPlan> best_insertion(const SearchState& s, int customer) const {
    std::optional<InsertionPlan> best;
    for (std::size_t k = 0; k < s.routes.size(); ++k) {
      const auto ins = ev_.cheapest_insertion(s.routes[k], customer, s.route_totals[k]);
      if (ins && (!best || ins->delta < best->delta))
        best = InsertionPlan{ins->delta, static_cast<int>(k), ins->route};
    }
    used_.assign(inst_.vehicles.size(), 0);
    for (const Route& r : s.routes) used_[static_cast<std::size_t>(r.vehicle)] = 1;
    for (std::size_t ci = 0; ci < classes_.size(); ++ci) {
      const int v = first_unused(ci);
      if (v < 0) continue;
      const Route empty = empty_route(v);
      const auto ins = ev_.cheapest_insertion(empty, customer, class_empty_total_[ci]);
      if (!ins) continue;
      const double delta = ins->delta + class_empty_total_[ci];
      if (!best || delta < best->delta) best = InsertionPlan{delta, -1, ins->route};
    }
    return best;
  }

  void apply_insertion(SearchState& s, const InsertionPlan& plan) const {
    const double rc = ev_.route_cost(plan.route).total();
    if (plan.route_index >= 0) {
      s.routes[static_cast<std::size_t>(plan.route_index)] = plan.route;
      s.route_totals[static_cast<std::size_t>(plan.route_index)] = rc;
    } else {
      s.routes.push_back(plan.route);
      s.route_totals.push_back(rc);
    }
  }

  void refresh_total(SearchState& s) const {
    double t = 0.0;
    for (double rt : s.route_totals) t += rt;
    for (int c : s.unserved) t += penalty_of(c);
    s.total = t;
  }

 private:
  struct CacheEntry {
    bool feasible = false;
    double delta = 0.0;
  };

  // Shared insertion loop for both repair operators. Candidate columns are
  // the existing routes, routes opened during this repair, and one virtual
  // empty route per vehicle group that still has an unused member. Cached
  // deltas are recomputed only for the column the last insertion touched.
  void repair_core(SearchState& s, std::vector<int> pool, Rng& rng, bool regret) const {
    pool.insert(pool.end(), s.unserved.begin(), s.unserved.end());
    s.unserved.clear();
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    if (pool.empty()) {
      refresh_total(s);
      return;
    }

    used_.assign(inst_.vehicles.size(), 0);
    for (const Route& r : s.routes) used_[static_cast<std::size_t>(r.vehicle)] = 1;

    // Column layout: [0, route_limit) routes (existing plus up to one opened
    // per pool customer), then one column per vehicle group.
    const std::size_t P = pool.size();
    const std::size_t C = classes_.size();
    const std::size_t route_limit = s.routes.size() + P;
    const std::size_t stride = route_limit + C;
    std::size_t live_routes = s.routes.size();
    cache_.assign(P * stride, CacheEntry{});
    auto cell = [&](std::size_t i, std::size_t k) -> CacheEntry& {
      return cache_[i * stride + k];
    };

    auto compute_route_cell = [&](std::size_t i, std::size_t k) {
      CacheEntry& e = cell(i, k);
      e.feasible = false;
      if (rng_blinks(rng)) return;
      const auto ins = ev_.cheapest_insertion(s.routes[k], pool[i], s.route_totals[k]);
      if (ins) {
        e.feasible = true;
        e.delta = ins->delta;
      }
    };
    auto compute_class_cell = [&](std::size_t i, std::size_t ci) {
      CacheEntry& e = cell(i, route_limit + ci);
      e.feasible = false;
      if (first_unused(ci) < 0) return;
      if (rng_blinks(rng)) return;
      const Route empty = empty_route(classes_[ci].front());
      const auto ins = ev_.cheapest_insertion(empty, pool[i], class_empty_total_[ci]);
      if (ins) {
        e.feasible = true;
        e.delta = ins->delta + class_empty_total_[ci];
      }
    };

    std::vector<std::uint8_t> alive(P, 1);
    for (std::size_t i = 0; i < P; ++i) {
      for (std::size_t k = 0; k < live_routes; ++k) compute_route_cell(i, k);
      for (std::size_t ci = 0; ci < C; ++ci) compute_class_cell(i, ci);
    }

    std::size_t remaining = P;
    while (remaining > 0) {
      int pick = -1;
      double pick_regret = -1.0, pick_delta = 0.0;
      std::size_t pick_col = 0;
      for (std::size_t i = 0; i < P; ++i) {
        if (!alive[i]) continue;
        const double limit = penalty_of(pool[i]);
        double best = std::numeric_limits<double>::infinity();
        double second = std::numeric_limits<double>::infinity();
        std::size_t best_col = 0;
        auto consider = [&](std::size_t k) {
          const CacheEntry& e = cell(i, k);
          if (!e.feasible || e.delta >= limit) return;
          if (e.delta < best) {
            second = best;
            best = e.delta;
            best_col = k;
          } else if (e.delta < second) {
            second = e.delta;
          }
        };
        for (std::size_t k = 0; k < live_routes; ++k) consider(k);
        for (std::size_t ci = 0; ci < C; ++ci) consider(route_limit + ci);
        if (!std::isfinite(best)) continue;  // leaving it unserved is cheapest for now
        if (regret) {
          const double reg = std::isfinite(second)
                                 ? second - best
                                 : std::numeric_limits<double>::infinity();
          const bool better =
              pick < 0 || reg > pick_regret || (reg == pick_regret && best > pick_delta) ||
              (reg == pick_regret && best == pick_delta &&
               pool[i] < pool[static_cast<std::size_t>(pick)]);
          if (better) {
            pick = static_cast<int>(i);
            pick_regret = reg;
            pick_delta = best;
            pick_col = best_col;
          }
        } else if (pick < 0 || best < pick_delta ||
                   (best == pick_delta && pool[i] < pool[static_cast<std::size_t>(pick)])) {
          pick = static_cast<int>(i);
          pick_delta = best;
          pick_col = best_col;
        }
      }
      if (pick < 0) {
        for (std::size_t i = 0; i < P; ++i)
          if (alive[i]) s.unserved.push_back(pool[i]);
        break;
      }

      const std::size_t i = static_cast<std::size_t>(pick);
      std::optional<InsertionPlan> plan;
      if (pick_col < route_limit) {
        const auto ins =
            ev_.cheapest_insertion(s.routes[pick_col], pool[i], s.route_totals[pick_col]);
        if (ins) plan = InsertionPlan{ins->delta, static_cast<int>(pick_col), ins->route};
      } else {
        const std::size_t ci = pick_col - route_limit;
        const int v = first_unused(ci);
        if (v >= 0) {
          const Route empty = empty_route(v);
          const auto ins = ev_.cheapest_insertion(empty, pool[i], class_empty_total_[ci]);
          if (ins)
            plan = InsertionPlan{ins->delta + class_empty_total_[ci], -1, ins->route};
        }
      }
      if (!plan) {  // stale cell; disable it and rescan
        cell(i, pick_col).feasible = false;
        continue;
      }

      alive[i] = 0;
      remaining--;
      const bool opened = plan->route_index < 0;
      apply_insertion(s, *plan);
      if (opened) {
        used_[static_cast<std::size_t>(plan->route.vehicle)] = 1;
        const std::size_t newcol = live_routes++;
        const std::size_t ci = class_of(plan->route.vehicle);
        const bool spare = first_unused(ci) >= 0;
        for (std::size_t j = 0; j < P; ++j) {
          if (!alive[j]) continue;
          compute_route_cell(j, newcol);
          // Twin vehicles share the empty-route column, so it stays valid
          // while a spare remains.
          if (!spare) cell(j, route_limit + ci).feasible = false;
        }
      } else {
        for (std::size_t j = 0; j < P; ++j)
          if (alive[j]) compute_route_cell(j, static_cast<std::size_t>(plan->route_index));
      }
    }
    std::sort(s.unserved.begin(), s.unserved.end());
    refresh_total(s);
  }

  const Node& node(int i) const { return inst_.nodes[static_cast<std::size_t>(i)]; }

  double penalty_of(int customer) const { return node(customer).penalty; }

  int customer_count(const std::vector<int>& seq) const {
    int n = 0;
    for (int nd : seq)
      if (node(nd).kind == NodeKind::customer) n++;
    return n;
  }

  bool rng_blinks(Rng& rng) const {
    return p_.blink_rate > 0.0 && rng.uniform() < p_.blink_rate;
  }

  bool same_class(int va, int vb) const {
    const Vehicle& a = inst_.vehicles[static_cast<std::size_t>(va)];
    const Vehicle& b = inst_.vehicles[static_cast<std::size_t>(vb)];
    return a.type == b.type && a.skills == b.skills &&
           a.home_start.value_or(inst_.depot_start) ==
               b.home_start.value_or(inst_.depot_start) &&
           a.home_end.value_or(inst_.depot_end) == b.home_end.value_or(inst_.depot_end) &&
           a.charger_distance_km == b.charger_distance_km;
  }

  std::size_t class_of(int vehicle) const {
    for (std::size_t ci = 0; ci < classes_.size(); ++ci)
      if (same_class(classes_[ci].front(), vehicle)) return ci;
    return 0;
  }

  int first_unused(std::size_t ci) const {
    for (int v : classes_[ci])
      if (!used_[static_cast<std::size_t>(v)]) return v;
    return -1;
  }

  Route empty_route(int vehicle) const {
    const Vehicle& veh = inst_.vehicles[static_cast<std::size_t>(vehicle)];
    return Route{vehicle,
                 {veh.home_start.value_or(inst_.depot_start),
                  veh.home_end.value_or(inst_.depot_end)},
                 0.0};
  }

  // Symmetrized base travel time doubles as the proximity metric.
  double proximity(int i, int j) const {
    return 0.5 * (inst_.travel_min(0, i, j) + inst_.travel_min(0, j, i));
  }

  double window_gap(int i, int j) const {
    return 0.5 * (std::abs(node(i).tw_early - node(j).tw_early) +
                  std::abs(node(i).tw_late - node(j).tw_late));
  }

  double relatedness(int a, int b, const std::vector<double>& arrival,
                     const std::vector<int>& route_of) const {
    const double d = proximity(a, b) * shaw_dist_norm_;
    const double t = std::abs(arrival[static_cast<std::size_t>(a)] -
                              arrival[static_cast<std::size_t>(b)]) /
                     horizon_;
    const double w = window_gap(a, b) * shaw_window_norm_;
    const double q = std::abs(ev_.demand_units(a) - ev_.demand_units(b)) * shaw_demand_norm_;
    const double same = route_of[static_cast<std::size_t>(a)] ==
                                route_of[static_cast<std::size_t>(b)]
                            ? 1.0
                            : 0.0;
    return p_.shaw_distance * d + p_.shaw_time * (t + w) / 2.0 + p_.shaw_demand * q +
           p_.shaw_same_route * same;
  }

  std::vector<std::pair<int, int>> routed_index(const SearchState& s) const {
    std::vector<std::pair<int, int>> out;  // (route index, customer node)
    for (std::size_t k = 0; k < s.routes.size(); ++k)
      for (int nd : s.routes[k].sequence)
        if (node(nd).kind == NodeKind::customer) out.push_back({static_cast<int>(k), nd});
    return out;
  }

  // Detach a set of customers from whichever routes hold them.
  void detach(SearchState& s, const std::vector<int>& nodes_out) const {
    if (nodes_out.empty()) return;
    for (Route& r : s.routes)
      r.sequence.erase(std::remove_if(r.sequence.begin(), r.sequence.end(),
                                      [&](int nd) {
                                        return std::find(nodes_out.begin(), nodes_out.end(),
                                                         nd) != nodes_out.end();
                                      }),
                       r.sequence.end());
    std::vector<int> dump;
    refresh_routes(s, dump);
    // Customers orphaned because their whole route broke go to the unserved
    // pool, so the following repair still sees them and nothing is lost.
    s.unserved.insert(s.unserved.end(), dump.begin(), dump.end());
    refresh_total(s);
  }

  // Re-plan every route after a mutation: recharge amounts move, pointless
  // station visits are dropped, emptied or broken routes dissolve.
  void refresh_routes(SearchState& s, std::vector<int>& dump) const {
    for (std::size_t k = 0; k < s.routes.size();) {
      if (settle_route(s, k, dump)) ++k;
      // otherwise the route at k was erased: re-check the same slot
    }
  }

  // Returns false if the route at k was erased.
  bool settle_route(SearchState& s, std::size_t k, std::vector<int>& dump) const {
    Route& r = s.routes[k];
    if (customer_count(r.sequence) == 0) {
      erase_route(s, k);
      return false;
    }
    eval::RouteCost rc = ev_.plan_route(r);
    int station = -1;
    for (int nd : r.sequence)
      if (node(nd).kind == NodeKind::station) station = nd;
    if (station >= 0 && (!rc.feasible || r.recharge_kwh <= 0.0)) {
      scratch_ = r.sequence;
      scratch_.erase(std::find(scratch_.begin(), scratch_.end(), station));
      const eval::RouteCost bare = ev_.planned_cost(r.vehicle, scratch_);
      if (bare.feasible && (!rc.feasible || bare.total() <= rc.total() + eval::kCostEps)) {
        r.sequence = scratch_;
        r.recharge_kwh = 0.0;
        rc = bare;
      }
    }
    if (!rc.feasible) {
      for (int nd : r.sequence)
        if (node(nd).kind == NodeKind::customer) dump.push_back(nd);
      erase_route(s, k);
      return false;
    }
    s.route_totals[k] = rc.total();
    return true;
  }

  void erase_route(SearchState& s, std::size_t k) const {
    s.routes.erase(s.routes.begin() + static_cast<std::ptrdiff_t>(k));
    s.route_totals.erase(s.route_totals.begin() + static_cast<std::ptrdiff_t>(k));
  }

  // Remove a contiguous string containing `nd`, or with probability one half
  // a split string whose preserved block stays inside the removed span.
  void remove_string(Route& r, int nd, int l_cap, Rng& rng, std::vector<int>& removed) const {
    std::vector<int> customers;
    int pos = -1;
    for (std::size_t p = 1; p + 1 < r.sequence.size(); ++p) {
      const int x = r.sequence[p];
      if (node(x).kind != NodeKind::customer) continue;
      if (x == nd) pos = static_cast<int>(customers.size());
      customers.push_back(x);
    }
    const int card = static_cast<int>(customers.size());
    if (card == 0 || pos < 0) return;
    const int lmax = std::min(l_cap, card);
    const int len = 1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(lmax)));

    std::vector<std::uint8_t> cut(customers.size(), 0);
    bool carved = false;
    if (len < card && rng.uniform() < 0.5) {
      // Split string: a preserved block of customers survives inside the
      // removed span. It must not cover the selected customer.
      int keep = 1;
      while (keep < card - len && rng.uniform() >= p_.sisr_keep_stop) keep++;
      const int span = len + keep;
      const int lo = std::max(0, pos - span + 1);
      const int hi = std::min(card - span, pos);
      const int start =
          lo + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(hi - lo + 1)));
      const int rel = pos - start;
      std::vector<int> offsets;
      for (int ko = 1; ko + keep <= span - 1; ++ko)
        if (rel < ko || rel >= ko + keep) offsets.push_back(ko);
      if (!offsets.empty()) {
        const int keep_off = offsets[static_cast<std::size_t>(rng.bounded(offsets.size()))];
        for (int q = 0; q < span; ++q)
          if (q < keep_off || q >= keep_off + keep)
            cut[static_cast<std::size_t>(start + q)] = 1;
        carved = true;
      }
    }
    if (!carved) {
      const int lo = std::max(0, pos - len + 1);
      const int hi = std::min(card - len, pos);
      const int start =
          lo + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(hi - lo + 1)));
      for (int q = 0; q < len; ++q) cut[static_cast<std::size_t>(start + q)] = 1;
    }
    for (int q = 0; q < card; ++q)
      if (cut[static_cast<std::size_t>(q)])
        removed.push_back(customers[static_cast<std::size_t>(q)]);
    r.sequence.erase(std::remove_if(r.sequence.begin(), r.sequence.end(),
                                    [&](int x) {
                                      for (int q = 0; q < card; ++q)
                                        if (cut[static_cast<std::size_t>(q)] &&
                                            customers[static_cast<std::size_t>(q)] == x)
                                          return true;
                                      return false;
                                    }),
                     r.sequence.end());
  }

  const Instance& inst_;
  Params p_;
  eval::Evaluator ev_;
  FleetMix mix_;
  std::vector<int> selected_;
  std::vector<int> realized_;
  std::vector<std::vector<int>> classes_;
  std::vector<double> class_empty_total_;
  double horizon_ = 1.0;
  double shaw_dist_norm_ = 0.0;
  double shaw_demand_norm_ = 0.0;
  double shaw_window_norm_ = 0.0;

  mutable std::vector<std::uint8_t> used_;
  mutable std::vector<std::uint64_t> hash_buf_;
  mutable std::vector<int> scratch_;
  mutable std::vector<CacheEntry> cache_;
};

inline Solution initial_solution(const Instance& inst, const FleetMix& mix,
                                 const Scenario& sc, const energy::PowerContext& ctx = {},
                                 std::uint64_t seed = 0, double reserve_soc_fraction = 0.0) {
  Workspace ws(inst, mix, sc, ctx, Params{}, reserve_soc_fraction);
  Rng rng = Rng::stream(seed, {stream_tag::kInitial, static_cast<std::uint64_t>(sc.seed)});
  const SearchState s = ws.construct(rng);
  return ws.to_solution(s);
}

inline Solution solve(const Instance& inst, const FleetMix& mix, const Scenario& sc,
                      const Params& params = {}, const energy::PowerContext& ctx = {},
                      double reserve_soc_fraction = 0.0, const Observer& observer = {}) {
  params.validate();
  Workspace ws(inst, mix, sc, ctx, params, reserve_soc_fraction);
  const auto tag = static_cast<std::uint64_t>(sc.seed);
  Rng r_init = Rng::stream(params.seed, {stream_tag::kInitial, tag});
  SearchState current = ws.construct(r_init);
  SearchState best = current;

  if (ws.fleet_empty() || ws.realized_customers().empty() || params.iterations == 0)
    return ws.to_solution(best);

  OperatorBank bank = OperatorBank::standard();
  Rng r_select = Rng::stream(params.seed, {stream_tag::kSelection, tag});
  Rng r_destroy = Rng::stream(params.seed, {stream_tag::kDestroy, tag});
  Rng r_repair = Rng::stream(params.seed, {stream_tag::kRepair, tag});
  Rng r_accept = Rng::stream(params.seed, {stream_tag::kAcceptance, tag});

  double temperature =
      current.total > 0.0 ? start_temperature(current.total, params.start_temp_factor) : 0.0;
  std::unordered_set<std::uint64_t> seen;
  seen.insert(ws.fingerprint(current));
  long since_best = 0;

  std::vector<double> dw(bank.destroy.size()), rw(bank.repair.size());
  const auto t0 = std::chrono::steady_clock::now();

  for (long it = 1; it <= params.iterations; ++it) {
    if (params.time_limit_s > 0.0 && (it & 63) == 0) {
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
      if (dt.count() > params.time_limit_s) break;
    }
    for (std::size_t i = 0; i < dw.size(); ++i) dw[i] = bank.destroy[i].weight;
    for (std::size_t i = 0; i < rw.size(); ++i) rw[i] = bank.repair[i].weight;
    const int d = static_cast<int>(r_select.weighted_index(dw));
    const int rp = static_cast<int>(r_select.weighted_index(rw));

    SearchState candidate = current;
    std::vector<int> pool;
    const int routed = ws.routed_count(candidate);
    if (routed > 0) {
      const int qmin = std::max(1, static_cast<int>(std::ceil(params.removal_min * routed)));
      const int qmax = std::max(qmin, static_cast<int>(std::ceil(params.removal_max * routed)));
      const int q = static_cast<int>(r_destroy.uniform_int(qmin, qmax));
      switch (d) {
        case 0: pool = ws.destroy_random(candidate, q, r_destroy); break;
        case 1: pool = ws.destroy_worst(candidate, q, r_destroy); break;
        case 2: pool = ws.destroy_shaw(candidate, q, r_destroy); break;
        case 3: pool = ws.destroy_random_route(candidate, q, r_destroy); break;
        default: pool = ws.destroy_sisr(candidate, r_destroy); break;
      }
    }
    if (rp == 0)
      ws.repair_greedy(candidate, std::move(pool), r_repair);
    else
      ws.repair_regret2(candidate, std::move(pool), r_repair);

    const double delta = candidate.total - current.total;
    bool accepted = false;
    if (delta < 0.0) {
      accepted = true;
    } else {
      const double u = r_accept.uniform();
      accepted = temperature > 0.0 && u < std::exp(-delta / temperature);
    }

    bool new_best = false;
    double reward = 0.0;
    if (accepted) {
      const bool fresh = seen.insert(ws.fingerprint(candidate)).second;
      if (candidate.total < best.total - eval::kCostEps) {
        new_best = true;
        reward = params.reward_best;
      } else if (delta < -eval::kCostEps) {
        reward = params.reward_better;
      } else if (fresh) {
        reward = params.reward_fresh;
      }
    }
    bank.destroy[static_cast<std::size_t>(d)].uses++;
    bank.repair[static_cast<std::size_t>(rp)].uses++;
    bank.destroy[static_cast<std::size_t>(d)].score += reward;
    bank.repair[static_cast<std::size_t>(rp)].score += reward;

    if (observer) {
      const Solution snapshot = ws.to_solution(candidate);
      IterationEvent ev;
      ev.iteration = it;
      ev.temperature = temperature;
      ev.destroy_op = d;
      ev.repair_op = rp;
      ev.accepted = accepted;
      ev.new_best = new_best;
      ev.candidate_cost = candidate.total;
      ev.current_cost = accepted ? candidate.total : current.total;
      ev.best_cost = new_best ? candidate.total : best.total;
      ev.candidate = &snapshot;
      observer(ev);
    }

    if (accepted) {
      if (new_best) best = candidate;
      current = std::move(candidate);
    }
    if (new_best) {
      since_best = 0;
    } else if (++since_best >= params.reset_threshold) {
      current = best;
      since_best = 0;
    }
    temperature *= params.cooling;
    if (it % params.segment == 0) adapt_weights(bank, params.reaction);
  }
  return ws.to_solution(best);
}

}  // namespace fleetmix::alns
