#pragma once

// Exhaustive exact solver for tiny operational instances. It enumerates every
// partition of the realized customers into ordered per-vehicle tours (plus the
// unserved set), tries every single-station insertion for electric vehicles,
// and prices everything with the same evaluator the heuristic uses, so its
// optimum is ground truth for solver and evaluator tests.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fleetmix/energy.hpp"
#include "fleetmix/eval.hpp"
#include "fleetmix/model.hpp"

namespace fleetmix::oracle {

// Hard size limits; exceeding any of them is a refusal, never a truncated
// search that silently returns a non-optimal plan.
struct Limits {
  int max_customers = 8;
  int max_vehicles = 3;
  int max_stations = 1;
  double time_budget_s = 120.0;  // 0 disables the wall-clock check
};

struct Result {
  Solution best;             // canonical order, cost breakdown filled in
  std::uint64_t nodes = 0;   // search states expanded
};

namespace detail {

// Flattened plan encoding used for deterministic tie-breaks between optima:
// routes in canonical order as (vehicle, sequence..., -1), then -2, then the
// unserved customers. Lexicographic comparison of these keys is total.
inline std::vector<int> plan_key(std::vector<Route> routes, std::vector<int> unserved) {
  std::sort(routes.begin(), routes.end(),
            [](const Route& a, const Route& b) { return a.vehicle < b.vehicle; });
  std::sort(unserved.begin(), unserved.end());
  std::vector<int> key;
  for (const Route& r : routes) {
    key.push_back(r.vehicle);
    key.insert(key.end(), r.sequence.begin(), r.sequence.end());
    key.push_back(-1);
  }
  key.push_back(-2);
  key.insert(key.end(), unserved.begin(), unserved.end());
  return key;
}

class Search {
 public:
  Search(const Instance& inst, const Scenario& sc, const FleetMix& mix,
         const energy::PowerContext& ctx, const Limits& lim, double reserve_soc_fraction)
      : inst_(inst), lim_(lim), ev_(inst, sc, ctx, reserve_soc_fraction) {
    for (int c : inst.customers)
      if (ev_.realized(c)) pool_.push_back(c);
    vehicles_ = mix.selected();
    for (int v : vehicles_)
      if (v < 0 || v >= static_cast<int>(inst.vehicles.size()))
        throw ConfigError("exhaustive search: fleet selects unknown vehicle " +
                          std::to_string(v));
    if (static_cast<int>(pool_.size()) > lim.max_customers)
      throw ConfigError("exhaustive search refused: " + std::to_string(pool_.size()) +
                        " realized customers exceed the limit of " +
                        std::to_string(lim.max_customers));
    if (static_cast<int>(vehicles_.size()) > lim.max_vehicles)
      throw ConfigError("exhaustive search refused: " + std::to_string(vehicles_.size()) +
                        " vehicles exceed the limit of " + std::to_string(lim.max_vehicles));
    if (static_cast<int>(inst.stations.size()) > lim.max_stations)
      throw ConfigError("exhaustive search refused: " + std::to_string(inst.stations.size()) +
                        " stations exceed the limit of " + std::to_string(lim.max_stations));

    assigned_.assign(pool_.size(), 0);
    first_idx_.assign(vehicles_.size(), -1);
    prev_twin_.assign(vehicles_.size(), -1);
    for (std::size_t i = 0; i < vehicles_.size(); ++i)
      for (std::size_t j = i + 1; j < vehicles_.size(); ++j)
        if (prev_twin_[j] < 0 && identical(vehicles_[i], vehicles_[j]))
          prev_twin_[j] = static_cast<int>(i);

    nonneg_costs_ = all_costs_nonnegative();
    deadline_valid_ = lim.time_budget_s > 0.0;
    deadline_ = std::chrono::steady_clock::now() +
                std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                    std::chrono::duration<double>(lim.time_budget_s));
  }

  Result run() {
    best_total_ = std::numeric_limits<double>::infinity();
    descend(0);
    Result res;
    res.nodes = nodes_;
    res.best.routes = best_routes_;
    res.best.unserved = best_unserved_;
    res.best.sort_canonical();
    // Authoritative breakdown from the evaluator, not the running sums.
    FleetMix mix;
    for (int v : vehicles_) mix.membership.push_back(v);
    res.best.cost = ev_.evaluate_solution(res.best, mix).cost;
    return res;
  }

 private:
  bool identical(int va, int vb) const {
    const Vehicle& a = inst_.vehicles[static_cast<std::size_t>(va)];
    const Vehicle& b = inst_.vehicles[static_cast<std::size_t>(vb)];
    return a.type == b.type && a.skills == b.skills &&
           start_of(a) == start_of(b) && end_of(a) == end_of(b) &&
           a.charger_distance_km == b.charger_distance_km;
  }

  int start_of(const Vehicle& v) const { return v.home_start.value_or(inst_.depot_start); }
  int end_of(const Vehicle& v) const { return v.home_end.value_or(inst_.depot_end); }

  bool all_costs_nonnegative() const {
    for (const VehicleType& t : inst_.vehicle_types) {
      if (t.fixed_cost < 0.0 || t.energy_cost_per_kwh < 0.0 ||
          t.maintenance_cost_per_km < 0.0)
        return false;
    }
    for (std::size_t ty = 0; ty < inst_.vehicle_types.size(); ++ty) {
      const double base = ev_.arc_power_kw(static_cast<int>(ty), 0.0);
      const double loaded = ev_.arc_power_kw(static_cast<int>(ty), 1.0);
      if (base < 0.0 || loaded < base) return false;
    }
    for (int c : pool_)
      if (inst_.nodes[static_cast<std::size_t>(c)].penalty < 0.0) return false;
    return true;
  }

  bool stations_usable(int vehicle) const {
    if (inst_.stations.empty()) return false;
    const Vehicle& veh = inst_.vehicles[static_cast<std::size_t>(vehicle)];
    return inst_.vehicle_types[static_cast<std::size_t>(veh.type)].powertrain ==
           Powertrain::ev;
  }

  void tick() {
    if ((++nodes_ & 255u) == 0 && deadline_valid_ &&
        std::chrono::steady_clock::now() > deadline_)
      throw ConfigError("exhaustive search refused: time budget exceeded");
  }

  // Advance to the next vehicle; past the last one, the remaining customers
  // become the unserved set of a complete candidate plan.
  void descend(std::size_t vi) {
    tick();
    if (nonneg_costs_ && closed_cost_ > best_total_ + eval::kCostEps) return;
    if (vi == vehicles_.size()) {
      finish();
      return;
    }
    const int v = vehicles_[vi];
    const Vehicle& veh = inst_.vehicles[static_cast<std::size_t>(v)];
    seq_.assign(1, start_of(veh));
    tau_stack_.assign(1, inst_.nodes[static_cast<std::size_t>(seq_[0])].tw_early);
    cost_stack_.assign(1, 0.0);
    demand_sum_ = 0.0;
    extend(vi);
  }

  void extend(std::size_t vi) {
    tick();
    const int v = vehicles_[vi];
    const Vehicle& veh = inst_.vehicles[static_cast<std::size_t>(v)];
    const VehicleType& vt = inst_.vehicle_types[static_cast<std::size_t>(veh.type)];
    const bool bound_ok =
        nonneg_costs_ && (inst_.triangle_inequality || !stations_usable(v));

    // Close first so short plans set a bound before deep branches run. The
    // next vehicle reuses the working stacks, so save and restore them.
    {
      const std::vector<int> keep_seq = seq_;
      const std::vector<double> keep_tau = tau_stack_;
      const std::vector<double> keep_cost = cost_stack_;
      const double keep_demand = demand_sum_;
      if (seq_.size() == 1) {
        first_idx_[vi] = -1;
        descend(vi + 1);
      } else if (auto closure = best_closure(v)) {
        routes_.push_back(closure->second);
        closed_cost_ += closure->first;
        descend(vi + 1);
        closed_cost_ -= closure->first;
        routes_.pop_back();
      }
      seq_ = keep_seq;
      tau_stack_ = keep_tau;
      cost_stack_ = keep_cost;
      demand_sum_ = keep_demand;
    }

    // Append one more customer.
    const int prev_twin = prev_twin_[vi];
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      if (assigned_[i]) continue;
      const int c = pool_[i];
      const Node& node = inst_.nodes[static_cast<std::size_t>(c)];
      if (!compatible(node, veh)) continue;
      if (seq_.size() == 1 && prev_twin >= 0) {
        // Identical vehicles take routes in first-customer order, empties last.
        const int pf = first_idx_[static_cast<std::size_t>(prev_twin)];
        if (pf < 0 || pf >= static_cast<int>(i)) continue;
      }
      const double d = ev_.demand_units(c);
      if (demand_sum_ + d > vt.cargo_capacity + eval::kFeasEps) continue;

      const int last = seq_.back();
      const Node& last_node = inst_.nodes[static_cast<std::size_t>(last)];
      const double minutes = inst_.travel_min(veh.type, last, c);
      const double arrive =
          std::max(node.tw_early, tau_stack_.back() + last_node.service_time + minutes);
      if (bound_ok && arrive > node.tw_late + eval::kFeasEps) continue;

      // Lower bound on the finished route: arcs priced at the load carried so
      // far; under the triangle inequality completions only cost more.
      const double load_on_arc =
          inst_.direction == Direction::pickup ? demand_sum_ : d;
      double partial = cost_stack_.back() +
                       (vt.energy_cost_per_kwh * ev_.arc_power_kw(veh.type, load_on_arc) +
                        vt.maintenance_cost_per_km * vt.speed_kmh) *
                           (minutes / 60.0);
      if (seq_.size() == 1) partial += vt.fixed_cost;
      if (bound_ok && closed_cost_ + partial > best_total_ + eval::kCostEps) continue;

      assigned_[i] = 1;
      if (seq_.size() == 1) first_idx_[vi] = static_cast<int>(i);
      seq_.push_back(c);
      tau_stack_.push_back(arrive);
      cost_stack_.push_back(partial);
      demand_sum_ += d;
      extend(vi);
      demand_sum_ -= d;
      cost_stack_.pop_back();
      tau_stack_.pop_back();
      seq_.pop_back();
      if (seq_.size() == 1) first_idx_[vi] = -1;
      assigned_[i] = 0;
    }
  }

  // Cheapest feasible way to end the current sequence at the home depot,
  // optionally detouring through one recharging station.
  std::optional<std::pair<double, Route>> best_closure(int v) {
    const Vehicle& veh = inst_.vehicles[static_cast<std::size_t>(v)];
    scratch_ = seq_;
    scratch_.push_back(end_of(veh));

    std::optional<std::pair<double, Route>> best;
    const eval::RouteCost plain = ev_.planned_cost(v, scratch_);
    if (plain.feasible) best = {plain.total(), Route{v, scratch_, plain.recharge_kwh}};

    bool try_stations = stations_usable(v);
    if (try_stations && best && nonneg_costs_ && inst_.triangle_inequality)
      try_stations = false;  // a detour can only add cost here
    if (try_stations) {
      for (int s : inst_.stations) {
        for (std::size_t pos = 1; pos < scratch_.size(); ++pos) {
          variant_ = scratch_;
          variant_.insert(variant_.begin() + static_cast<std::ptrdiff_t>(pos), s);
          const eval::RouteCost rc = ev_.planned_cost(v, variant_);
          if (!rc.feasible) continue;
          if (!best || rc.total() < best->first - eval::kCostEps ||
              (rc.total() <= best->first + eval::kCostEps &&
               variant_ < best->second.sequence)) {
            best = {rc.total(), Route{v, variant_, rc.recharge_kwh}};
          }
        }
      }
    }
    return best;
  }

  void finish() {
    double total = closed_cost_;
    for (std::size_t i = 0; i < pool_.size(); ++i)
      if (!assigned_[i]) total += inst_.nodes[static_cast<std::size_t>(pool_[i])].penalty;

    if (total > best_total_ + eval::kCostEps) return;
    std::vector<int> unserved;
    for (std::size_t i = 0; i < pool_.size(); ++i)
      if (!assigned_[i]) unserved.push_back(pool_[i]);
    if (total < best_total_ - eval::kCostEps) {
      best_total_ = total;
      best_routes_ = routes_;
      best_unserved_ = std::move(unserved);
      best_key_ = plan_key(best_routes_, best_unserved_);
      return;
    }
    std::vector<int> key = plan_key(routes_, unserved);
    if (key < best_key_) {
      best_total_ = std::min(best_total_, total);
      best_routes_ = routes_;
      best_unserved_ = std::move(unserved);
      best_key_ = std::move(key);
    }
  }

  const Instance& inst_;
  Limits lim_;
  eval::Evaluator ev_;

  std::vector<int> pool_;
  std::vector<int> vehicles_;
  std::vector<std::uint8_t> assigned_;
  std::vector<int> first_idx_;
  std::vector<int> prev_twin_;
  bool nonneg_costs_ = true;

  std::vector<int> seq_;
  std::vector<double> tau_stack_;
  std::vector<double> cost_stack_;
  double demand_sum_ = 0.0;
  std::vector<Route> routes_;
  double closed_cost_ = 0.0;
  std::vector<int> scratch_, variant_;

  double best_total_ = std::numeric_limits<double>::infinity();
  std::vector<Route> best_routes_;
  std::vector<int> best_unserved_;
  std::vector<int> best_key_;

  std::uint64_t nodes_ = 0;
  bool deadline_valid_ = false;
  std::chrono::steady_clock::time_point deadline_;
};

}  // namespace detail

inline Result exact_solve(const Instance& inst, const Scenario& sc, const FleetMix& mix,
                          const energy::PowerContext& ctx = {}, const Limits& limits = {},
                          double reserve_soc_fraction = 0.0) {
  detail::Search search(inst, sc, mix, ctx, limits, reserve_soc_fraction);
  return search.run();
}

}  // namespace fleetmix::oracle
