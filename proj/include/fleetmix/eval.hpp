#pragma once

// Route and plan evaluation under one scenario: forward recurrences for
// arrival time, carried load and state of charge; minimal-recharge planning
// at the single allowed station visit; arc costing (energy + distance
// maintenance + fixed charge); and the cheapest-insertion primitive the
// search is built on.
//
// An Evaluator is bound to (instance, scenario, power context) and owns
// precomputed per-type power coefficients plus scratch buffers, so it is
// cheap to call in inner loops but not safe to share across threads.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fleetmix/energy.hpp"
#include "fleetmix/model.hpp"

namespace fleetmix::eval {

inline constexpr double kCostEps = 1e-9;   // cost comparison tolerance
inline constexpr double kFeasEps = 1e-9;   // feasibility slack (minutes, kWh, units)

enum class Violation {
  none,
  depot_order,
  station_on_icev,
  multiple_stations,
  incompatible_customer,
  capacity,
  time_window,
  soc_negative,
};

inline const char* violation_name(Violation v) {
  switch (v) {
    case Violation::none: return "none";
    case Violation::depot_order: return "depot_order";
    case Violation::station_on_icev: return "station_on_icev";
    case Violation::multiple_stations: return "multiple_stations";
    case Violation::incompatible_customer: return "incompatible_customer";
    case Violation::capacity: return "capacity";
    case Violation::time_window: return "time_window";
    case Violation::soc_negative: return "soc_negative";
  }
  return "none";
}

// Allocation-free route verdict for search inner loops.
struct RouteCost {
  bool feasible = false;
  Violation violation = Violation::none;
  double fixed = 0.0;
  double energy = 0.0;       // USD
  double maintenance = 0.0;  // USD
  double energy_kwh = 0.0;   // net drawn
  double recharge_kwh = 0.0; // planned or stored amount at the station visit
  double served_demand = 0.0;
  int customers = 0;

  double total() const { return fixed + energy + maintenance; }
};

struct VisitState {
  int node = -1;
  double arrival_min = 0.0;     // after waiting
  double load_units = 0.0;      // cargo carried on arrival
  double soc_kwh = 0.0;         // on arrival
  double depart_soc_kwh = 0.0;  // after any recharge
};

struct RouteEvaluation {
  RouteCost cost;
  double min_soc_kwh = 0.0;
  std::vector<VisitState> states;

  bool feasible() const { return cost.feasible; }
  Violation violation() const { return cost.violation; }
};

struct InsertionResult {
  double delta = 0.0;   // evaluate(after) - evaluate(before)
  Route route;          // route with the customer (and possibly a station) inserted
  int position = -1;    // index the customer was inserted at
};

struct SolutionEvaluation {
  bool consistent = true;       // partition / membership bookkeeping holds
  std::string issue;            // first consistency problem, empty if none
  bool feasible = true;         // all routes feasible
  Violation violation = Violation::none;  // first infeasible route's class
  CostBreakdown cost;
  double served_demand = 0.0;
  double used_capacity = 0.0;   // sum of Q_k over used vehicles
  int unserved_count = 0;

  // Served demand over the capacity of the vehicles actually used.
  double fill_rate() const { return used_capacity > 0.0 ? served_demand / used_capacity : 0.0; }
};

class Evaluator {
 public:
  Evaluator(const Instance& inst, const Scenario& sc, const energy::PowerContext& ctx,
            double reserve_soc_fraction = 0.0)
      : inst_(&inst), sc_(&sc), reserve_fraction_(reserve_soc_fraction) {
    const int n = inst.node_count();
    demand_.assign(static_cast<std::size_t>(n), 0.0);
    realized_.assign(static_cast<std::size_t>(n), 0);
    for (std::size_t c = 0; c < inst.customers.size(); ++c) {
      const int node = inst.customers[c];
      if (c < sc.realized.size() && sc.realized[c]) {
        realized_[static_cast<std::size_t>(node)] = 1;
        demand_[static_cast<std::size_t>(node)] = scenario_demand(inst, sc, static_cast<int>(c));
      }
    }
    const double climate = climate_cache(ctx, sc.temperature_c);
    for (const VehicleType& vt : inst.vehicle_types) {
      TypeTable t;
      t.ev = vt.powertrain == Powertrain::ev;
      const double pm0 = energy::mechanical_power_kw(vt, 0.0, ctx);
      const double pm_per_kg = energy::mechanical_power_kw(vt, 1.0, ctx) - pm0;
      t.per_unit_kw = pm_per_kg * inst.unit_mass_kg;
      if (t.ev) {
        t.base_kw = pm0 + climate + vt.auxiliary_power_kw;
        t.fd = ctx.discharge_factor();
        t.fr = ctx.recuperation_factor();
      } else {
        t.base_kw = pm0;
        t.idle_kw = vt.engine.friction_factor * vt.engine.engine_speed * vt.engine.displacement;
        t.inv_eff = 1.0 / (vt.engine.eta_engine * vt.engine.eta_drivetrain);
      }
      t.energy_price = vt.energy_cost_per_kwh;
      t.maint_per_hour = vt.maintenance_cost_per_km * vt.speed_kmh;
      t.battery_kwh = vt.battery_kwh;
      t.capacity_units = vt.cargo_capacity;
      t.fixed_cost = vt.fixed_cost;
      types_.push_back(t);
    }
  }

  const Instance& instance() const { return *inst_; }
  const Scenario& scenario() const { return *sc_; }

  bool realized(int node) const { return realized_[static_cast<std::size_t>(node)] != 0; }
  double demand_units(int node) const { return demand_[static_cast<std::size_t>(node)]; }

  // Net power (kW) drawn by a vehicle type carrying `load_units` of cargo.
  double arc_power_kw(int type, double load_units) const {
    const TypeTable& t = types_[static_cast<std::size_t>(type)];
    const double p = t.base_kw + t.per_unit_kw * load_units;
    if (t.ev) return p >= 0.0 ? t.fd * p : t.fr * p;
    const double fuel = t.idle_kw + p * t.inv_eff;
    return fuel > 0.0 ? fuel : 0.0;
  }

  // Evaluate a stored route as-is (the stored recharge amount is trusted).
  RouteCost route_cost(const Route& r) const {
    return walk(r.vehicle, r.sequence, /*plan=*/false, r.recharge_kwh, nullptr);
  }

  // Evaluate a candidate sequence, planning the minimal recharge amount.
  RouteCost planned_cost(int vehicle, std::span<const int> seq) const {
    return walk(vehicle, seq, /*plan=*/true, 0.0, nullptr);
  }

  // Plans the recharge amount in place and returns the verdict.
  RouteCost plan_route(Route& r) const {
    RouteCost rc = walk(r.vehicle, r.sequence, /*plan=*/true, 0.0, nullptr);
    r.recharge_kwh = rc.recharge_kwh;
    return rc;
  }

  RouteEvaluation evaluate_route(const Route& r) const {
    RouteEvaluation ev;
    ev.states.clear();
    ev.cost = walk(r.vehicle, r.sequence, /*plan=*/false, r.recharge_kwh, &ev);
    return ev;
  }

  // Best feasible insertion of `customer` into `route`. Scans every position;
  // on equal deltas (1e-9) the lowest position wins. For EVs whose plain
  // insertions fail only on charge, additionally tries adding one station
  // visit (every station, every position) when the route has none yet.
  std::optional<InsertionResult> cheapest_insertion(const Route& route, int customer,
                                                    double route_total_before) const {
    const Vehicle& veh = inst_->vehicles[static_cast<std::size_t>(route.vehicle)];
    if (!compatible(inst_->nodes[static_cast<std::size_t>(customer)], veh)) return std::nullopt;
    const std::size_t len = route.sequence.size();
    scratch_.assign(route.sequence.begin(), route.sequence.end());
    scratch_.insert(scratch_.begin() + 1, customer);

    std::optional<InsertionResult> best;
    bool soc_blocked = false;
    bool has_station = false;
    for (int nd : route.sequence)
      if (inst_->nodes[static_cast<std::size_t>(nd)].kind == NodeKind::station) has_station = true;

    for (std::size_t pos = 1; pos + 1 <= len; ++pos) {
      scratch_[pos] = customer;
      const RouteCost rc = walk(route.vehicle, scratch_, true, 0.0, nullptr);
      if (rc.feasible) {
        const double delta = rc.total() - route_total_before;
        if (!best || delta < best->delta - kCostEps) {
          best = InsertionResult{delta, Route{route.vehicle, {}, rc.recharge_kwh},
                                 static_cast<int>(pos)};
          best->route.sequence.assign(scratch_.begin(), scratch_.end());
        }
      } else if (rc.violation == Violation::soc_negative) {
        soc_blocked = true;
      }
      if (pos + 1 <= len && pos < scratch_.size() - 1) scratch_[pos] = route.sequence[pos];
    }
    if (best || !soc_blocked || has_station) return best;
    const TypeTable& t = types_[static_cast<std::size_t>(veh.type)];
    if (!t.ev || inst_->stations.empty()) return best;

    // Station rescue: customer at any position, one station at any position.
    for (std::size_t cpos = 1; cpos + 1 <= len; ++cpos) {
      scratch_.assign(route.sequence.begin(), route.sequence.end());
      scratch_.insert(scratch_.begin() + static_cast<std::ptrdiff_t>(cpos), customer);
      for (int st : inst_->stations) {
        for (std::size_t spos = 1; spos + 1 <= scratch_.size(); ++spos) {
          scratch2_.assign(scratch_.begin(), scratch_.end());
          scratch2_.insert(scratch2_.begin() + static_cast<std::ptrdiff_t>(spos), st);
          const RouteCost rc = walk(route.vehicle, scratch2_, true, 0.0, nullptr);
          if (!rc.feasible) continue;
          const double delta = rc.total() - route_total_before;
          if (!best || delta < best->delta - kCostEps) {
            best = InsertionResult{delta, Route{route.vehicle, scratch2_, rc.recharge_kwh},
                                   static_cast<int>(cpos)};
          }
        }
      }
    }
    return best;
  }

  // Prices and checks a full plan against the scenario and the owned fleet.
  SolutionEvaluation evaluate_solution(const Solution& sol, const FleetMix& mix) const {
    SolutionEvaluation out;
    std::vector<std::uint8_t> seen_vehicle(inst_->vehicles.size(), 0);
    std::vector<std::uint8_t> seen_customer(inst_->nodes.size(), 0);
    auto fail = [&](const std::string& msg) {
      if (out.consistent) {
        out.consistent = false;
        out.issue = msg;
      }
    };
    for (const Route& r : sol.routes) {
      if (r.vehicle < 0 || r.vehicle >= static_cast<int>(inst_->vehicles.size())) {
        fail("route references unknown vehicle " + std::to_string(r.vehicle));
        continue;
      }
      if (!mix.membership.empty() && !mix.membership[static_cast<std::size_t>(r.vehicle)])
        fail("route uses vehicle " + std::to_string(r.vehicle) + " outside the owned fleet");
      if (seen_vehicle[static_cast<std::size_t>(r.vehicle)]++)
        fail("vehicle " + std::to_string(r.vehicle) + " appears in more than one route");
      for (std::size_t p = 1; p + 1 < r.sequence.size(); ++p) {
        const int nd = r.sequence[p];
        if (inst_->nodes[static_cast<std::size_t>(nd)].kind != NodeKind::customer) continue;
        if (!realized(nd))
          fail("customer " + std::to_string(inst_->nodes[static_cast<std::size_t>(nd)].id) +
               " is routed but not realized in the scenario");
        if (seen_customer[static_cast<std::size_t>(nd)]++)
          fail("customer " + std::to_string(inst_->nodes[static_cast<std::size_t>(nd)].id) +
               " is served more than once");
      }
      const RouteCost rc = route_cost(r);
      if (!rc.feasible && out.feasible) {
        out.feasible = false;
        out.violation = rc.violation;
      }
      out.cost.fixed += rc.fixed;
      out.cost.energy += rc.energy;
      out.cost.maintenance += rc.maintenance;
      out.served_demand += rc.served_demand;
      if (rc.customers > 0)
        out.used_capacity +=
            types_[static_cast<std::size_t>(inst_->vehicles[static_cast<std::size_t>(r.vehicle)].type)]
                .capacity_units;
    }
    for (int nd : sol.unserved) {
      if (inst_->nodes[static_cast<std::size_t>(nd)].kind != NodeKind::customer || !realized(nd)) {
        fail("unserved entry " + std::to_string(inst_->nodes[static_cast<std::size_t>(nd)].id) +
             " is not a realized customer");
        continue;
      }
      if (seen_customer[static_cast<std::size_t>(nd)]++)
        fail("customer " + std::to_string(inst_->nodes[static_cast<std::size_t>(nd)].id) +
             " is both served and unserved");
      out.cost.penalty += inst_->nodes[static_cast<std::size_t>(nd)].penalty;
      out.unserved_count++;
    }
    for (std::size_t c = 0; c < inst_->customers.size(); ++c) {
      const int nd = inst_->customers[c];
      if (realized(nd) && !seen_customer[static_cast<std::size_t>(nd)])
        fail("realized customer " + std::to_string(inst_->nodes[static_cast<std::size_t>(nd)].id) +
             " is neither served nor unserved");
    }
    return out;
  }

 private:
  struct TypeTable {
    bool ev = true;
    double base_kw = 0.0;      // EV: P_M(0)+P_T+P_O pre-chain; ICEV: P_M(0)
    double per_unit_kw = 0.0;  // d P_M / d cargo-unit
    double fd = 1.0, fr = 1.0;
    double idle_kw = 0.0, inv_eff = 0.0;
    double energy_price = 0.0;
    double maint_per_hour = 0.0;  // M_k * v_k
    double battery_kwh = 0.0;
    double capacity_units = 0.0;
    double fixed_cost = 0.0;
  };

  static double climate_cache(const energy::PowerContext& ctx, double temp_c) {
    return energy::climate_power_kw(ctx, temp_c);
  }

  const Node& node(int i) const { return inst_->nodes[static_cast<std::size_t>(i)]; }

  int home_start(const Vehicle& v) const { return v.home_start.value_or(inst_->depot_start); }
  int home_end(const Vehicle& v) const { return v.home_end.value_or(inst_->depot_end); }

  // Forward walk. Violations are reported by class priority: structure,
  // compatibility, capacity, time, charge.
  RouteCost walk(int vehicle, std::span<const int> seq, bool plan, double stored_recharge,
                 RouteEvaluation* detail) const {
    RouteCost rc;
    const Vehicle& veh = inst_->vehicles[static_cast<std::size_t>(vehicle)];
    const TypeTable& t = types_[static_cast<std::size_t>(veh.type)];

    // Structure.
    if (seq.size() < 2 || seq.front() != home_start(veh) || seq.back() != home_end(veh)) {
      rc.violation = Violation::depot_order;
      return rc;
    }
    int station_pos = -1;
    int station_count = 0;
    for (std::size_t p = 1; p + 1 < seq.size(); ++p) {
      const NodeKind k = node(seq[p]).kind;
      if (k == NodeKind::depot_start || k == NodeKind::depot_end) {
        rc.violation = Violation::depot_order;
        return rc;
      }
      if (k == NodeKind::station) {
        station_count++;
        station_pos = static_cast<int>(p);
      }
    }
    if (station_count > 0 && !t.ev) {
      rc.violation = Violation::station_on_icev;
      return rc;
    }
    if (station_count > 1) {
      rc.violation = Violation::multiple_stations;
      return rc;
    }
    for (std::size_t p = 1; p + 1 < seq.size(); ++p) {
      if (node(seq[p]).kind == NodeKind::customer && !compatible(node(seq[p]), veh)) {
        rc.violation = Violation::incompatible_customer;
        return rc;
      }
    }

    const std::size_t L = seq.size();
    load_buf_.resize(L);
    pref_buf_.resize(L);
    time_buf_.resize(L);

    // Carried load on arrival at each stop.
    double total_demand = 0.0;
    for (std::size_t p = 1; p + 1 < L; ++p)
      if (node(seq[p]).kind == NodeKind::customer) total_demand += demand_units(seq[p]);
    rc.served_demand = total_demand;
    bool over_capacity = false;
    double load = inst_->direction == Direction::pickup ? 0.0 : total_demand;
    for (std::size_t p = 0; p < L; ++p) {
      load_buf_[p] = load;
      if (load > t.capacity_units + kFeasEps) over_capacity = true;
      const double d = node(seq[p]).kind == NodeKind::customer ? demand_units(seq[p]) : 0.0;
      load += inst_->direction == Direction::pickup ? d : -d;
    }

    // Per-arc consumption; prefix sums of energy drawn since the start.
    double pref = 0.0;
    for (std::size_t p = 0; p < L; ++p) {
      pref_buf_[p] = pref;
      if (p + 1 < L) {
        const double minutes = inst_->travel_min(veh.type, seq[p], seq[p + 1]);
        pref += arc_power_kw(veh.type, load_buf_[p + 1]) * (minutes / 60.0);
      }
    }
    rc.energy_kwh = pref;

    // Recharge amount at the station, if any.
    double recharge = 0.0;
    bool over_battery = false;
    const double E = t.battery_kwh;
    if (station_pos >= 0) {
      const double y_station = E - pref_buf_[static_cast<std::size_t>(station_pos)];
      if (plan) {
        double min_suffix = E;  // min over later arrivals of SOC without recharging
        for (std::size_t p = static_cast<std::size_t>(station_pos) + 1; p < L; ++p)
          min_suffix = std::min(min_suffix, E - pref_buf_[p]);
        const double reserve = reserve_fraction_ * E;
        recharge = std::max(0.0, reserve - min_suffix);
        if (recharge > 0.0 && y_station + recharge > E) {
          recharge = E - y_station;  // cap at a full battery; feasibility checked below
          if (recharge < 0.0) recharge = 0.0;
        }
      } else {
        recharge = stored_recharge;
        if (recharge < -kFeasEps || y_station + recharge > E + kFeasEps) over_battery = true;
      }
    }
    rc.recharge_kwh = recharge;

    // Arrival times, waiting allowed; the station dwell is the charging time.
    bool late = false;
    double tau = node(seq[0]).tw_early;
    time_buf_[0] = tau;
    for (std::size_t p = 1; p < L; ++p) {
      const int prev = seq[p - 1];
      double dwell = node(prev).service_time;
      if (node(prev).kind == NodeKind::station) {
        const auto& curve =
            energy::ChargingFunction::for_kind(inst_->chargers.at(prev));
        const double y_arr = E - pref_buf_[static_cast<std::size_t>(station_pos)];
        const double from = std::clamp(y_arr, 0.0, curve.max_soc());
        const double to = std::clamp(y_arr + recharge, from, curve.max_soc());
        dwell = curve.time_for(from, to);
      }
      tau = std::max(node(seq[p]).tw_early, tau + dwell + inst_->travel_min(veh.type, prev, seq[p]));
      time_buf_[p] = tau;
      if (tau > node(seq[p]).tw_late + kFeasEps) late = true;
    }

    // State of charge on arrival.
    bool soc_bad = over_battery;
    double min_soc = E;
    for (std::size_t p = 0; p < L; ++p) {
      double y = E - pref_buf_[p];
      if (station_pos >= 0 && p > static_cast<std::size_t>(station_pos)) y += recharge;
      min_soc = std::min(min_soc, y);
      if (y < -kFeasEps) soc_bad = true;
    }

    // Costs: fixed charge plus energy and distance maintenance on every arc.
    rc.fixed = t.fixed_cost;
    rc.energy = t.energy_price * rc.energy_kwh;
    double hours = 0.0;
    for (std::size_t p = 0; p + 1 < L; ++p)
      hours += inst_->travel_min(veh.type, seq[p], seq[p + 1]) / 60.0;
    rc.maintenance = t.maint_per_hour * hours;
    for (std::size_t p = 1; p + 1 < L; ++p)
      if (node(seq[p]).kind == NodeKind::customer) rc.customers++;

    if (over_capacity) {
      rc.violation = Violation::capacity;
    } else if (late) {
      rc.violation = Violation::time_window;
    } else if (soc_bad) {
      rc.violation = Violation::soc_negative;
    } else {
      rc.feasible = true;
    }

    if (detail) {
      detail->min_soc_kwh = min_soc;
      detail->states.resize(L);
      for (std::size_t p = 0; p < L; ++p) {
        VisitState& vs = detail->states[p];
        vs.node = seq[p];
        vs.arrival_min = time_buf_[p];
        vs.load_units = load_buf_[p];
        vs.soc_kwh = E - pref_buf_[p];
        if (station_pos >= 0 && p > static_cast<std::size_t>(station_pos))
          vs.soc_kwh += recharge;
        vs.depart_soc_kwh = vs.soc_kwh;
        if (station_pos >= 0 && p == static_cast<std::size_t>(station_pos))
          vs.depart_soc_kwh += recharge;
      }
    }
    return rc;
  }

  const Instance* inst_;
  const Scenario* sc_;
  double reserve_fraction_;
  std::vector<double> demand_;
  std::vector<std::uint8_t> realized_;
  std::vector<TypeTable> types_;
  mutable std::vector<double> load_buf_, pref_buf_, time_buf_;
  mutable std::vector<int> scratch_, scratch2_;
};

}  // namespace fleetmix::eval
