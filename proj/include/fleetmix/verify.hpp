#pragma once

// Independent plan checker. Re-derives every recurrence with direct calls
// into the power model (no cached coefficients, no shared walk code with the
// evaluator) so the two implementations cross-check each other. Accepts an
// explicit arc-list route form that cannot be expressed as a sequence;
// station incidence is checked before path connectivity so that malformed
// combustion routes are classified by their root cause.

#include <map>
#include <string>
#include <vector>

#include "fleetmix/energy.hpp"
#include "fleetmix/eval.hpp"
#include "fleetmix/model.hpp"

namespace fleetmix::verify {

struct CheckedRoute {
  int vehicle = -1;
  std::vector<int> sequence;              // node indices; preferred form
  std::vector<std::pair<int, int>> arcs;  // used when sequence is empty
  double recharge_kwh = 0.0;
};

struct CheckedPlan {
  std::vector<CheckedRoute> routes;
  std::vector<int> unserved;  // node indices
  CostBreakdown stored_cost;
  bool has_stored_cost = false;
};

struct Finding {
  int route_index = -1;  // -1 for plan-level findings
  eval::Violation violation = eval::Violation::none;
  std::string detail;
};

struct Report {
  bool ok = true;
  std::vector<Finding> findings;
  CostBreakdown recomputed;

  const char* first_violation_name() const {
    return findings.empty() ? "none" : eval::violation_name(findings.front().violation);
  }
};

namespace detail {

inline void add(Report& rep, int route, eval::Violation v, std::string msg) {
  rep.ok = false;
  rep.findings.push_back({route, v, std::move(msg)});
}

// Reassembles an arc list into a start->end path; empty result if the arcs
// do not form one simple path covering all of them.
inline std::vector<int> arcs_to_path(const std::vector<std::pair<int, int>>& arcs, int start,
                                     int end) {
  std::map<int, int> next;
  std::map<int, int> indeg;
  for (const auto& [i, j] : arcs) {
    if (next.count(i)) return {};
    next[i] = j;
    indeg[j]++;
    if (indeg[j] > 1) return {};
  }
  std::vector<int> path{start};
  int cur = start;
  std::size_t used = 0;
  while (next.count(cur)) {
    cur = next[cur];
    path.push_back(cur);
    if (++used > arcs.size()) return {};
  }
  if (cur != end || used != arcs.size()) return {};
  return path;
}

}  // namespace detail

inline Report check(const Instance& inst, const Scenario& sc, const FleetMix& mix,
                    const CheckedPlan& plan, const energy::PowerContext& ctx) {
  Report rep;
  auto node = [&](int i) -> const Node& { return inst.nodes[static_cast<std::size_t>(i)]; };
  std::vector<std::uint8_t> realized(inst.nodes.size(), 0);
  std::vector<double> demand(inst.nodes.size(), 0.0);
  for (std::size_t c = 0; c < inst.customers.size(); ++c) {
    if (c < sc.realized.size() && sc.realized[c]) {
      realized[static_cast<std::size_t>(inst.customers[c])] = 1;
      demand[static_cast<std::size_t>(inst.customers[c])] =
          scenario_demand(inst, sc, static_cast<int>(c));
    }
  }

  std::vector<int> vehicle_uses(inst.vehicles.size(), 0);
  std::vector<int> customer_uses(inst.nodes.size(), 0);

  for (std::size_t ri = 0; ri < plan.routes.size(); ++ri) {
    const CheckedRoute& cr = plan.routes[ri];
    const int R = static_cast<int>(ri);
    if (cr.vehicle < 0 || cr.vehicle >= static_cast<int>(inst.vehicles.size())) {
      detail::add(rep, R, eval::Violation::depot_order, "unknown vehicle");
      continue;
    }
    const Vehicle& veh = inst.vehicles[static_cast<std::size_t>(cr.vehicle)];
    const VehicleType& vt = inst.type_of(veh);
    if (!mix.membership.empty() && !mix.membership[static_cast<std::size_t>(cr.vehicle)])
      detail::add(rep, R, eval::Violation::depot_order,
                  "vehicle " + std::to_string(cr.vehicle) + " is not in the owned fleet");
    if (++vehicle_uses[static_cast<std::size_t>(cr.vehicle)] > 1)
      detail::add(rep, R, eval::Violation::depot_order,
                  "vehicle " + std::to_string(cr.vehicle) + " drives more than one route");

    // Station incidence first: it explains malformed combustion routes even
    // when the arc list is not a path.
    int stations_touched = 0;
    auto count_station = [&](int nd) {
      if (node(nd).kind == NodeKind::station) stations_touched++;
    };
    if (!cr.sequence.empty()) {
      for (int nd : cr.sequence) count_station(nd);
    } else {
      for (const auto& [i, j] : cr.arcs) {
        count_station(i);
        count_station(j);
      }
    }
    if (vt.powertrain == Powertrain::icev && stations_touched > 0) {
      detail::add(rep, R, eval::Violation::station_on_icev,
                  "combustion vehicle touches a recharging station");
      continue;
    }

    const int start = veh.home_start.value_or(inst.depot_start);
    const int end = veh.home_end.value_or(inst.depot_end);
    std::vector<int> seq = cr.sequence;
    if (seq.empty()) {
      seq = detail::arcs_to_path(cr.arcs, start, end);
      if (seq.empty()) {
        detail::add(rep, R, eval::Violation::depot_order,
                    "arc list does not form one path from the start to the end depot");
        continue;
      }
    }
    if (seq.size() < 2 || seq.front() != start || seq.back() != end) {
      detail::add(rep, R, eval::Violation::depot_order,
                  "route must run from the vehicle's start depot to its end depot");
      continue;
    }
    bool order_ok = true;
    int stations_visited = 0;
    for (std::size_t p = 1; p + 1 < seq.size(); ++p) {
      const NodeKind k = node(seq[p]).kind;
      if (k == NodeKind::depot_start || k == NodeKind::depot_end) order_ok = false;
      if (k == NodeKind::station) stations_visited++;
    }
    if (!order_ok) {
      detail::add(rep, R, eval::Violation::depot_order, "depot appears mid-route");
      continue;
    }
    if (stations_visited > 1) {
      detail::add(rep, R, eval::Violation::multiple_stations,
                  "more than one recharging stop on a single tour");
      continue;
    }

    bool compat_ok = true;
    for (std::size_t p = 1; p + 1 < seq.size(); ++p) {
      const Node& nd = node(seq[p]);
      if (nd.kind != NodeKind::customer) continue;
      if (!compatible(nd, veh)) {
        detail::add(rep, R, eval::Violation::incompatible_customer,
                    "customer " + std::to_string(nd.id) + " incompatible with vehicle " +
                        std::to_string(cr.vehicle));
        compat_ok = false;
      }
      if (!realized[static_cast<std::size_t>(seq[p])])
        detail::add(rep, R, eval::Violation::depot_order,
                    "customer " + std::to_string(nd.id) + " not realized in this scenario");
      customer_uses[static_cast<std::size_t>(seq[p])]++;
    }
    if (!compat_ok) continue;

    // Load trace.
    double total = 0.0;
    for (std::size_t p = 1; p + 1 < seq.size(); ++p)
      if (node(seq[p]).kind == NodeKind::customer) total += demand[static_cast<std::size_t>(seq[p])];
    double load = inst.direction == Direction::pickup ? 0.0 : total;
    bool cap_bad = false;
    std::vector<double> load_on_arrival(seq.size());
    for (std::size_t p = 0; p < seq.size(); ++p) {
      load_on_arrival[p] = load;
      if (load > vt.cargo_capacity + 1e-9) cap_bad = true;
      if (node(seq[p]).kind == NodeKind::customer) {
        const double d = demand[static_cast<std::size_t>(seq[p])];
        load += inst.direction == Direction::pickup ? d : -d;
      }
    }
    if (cap_bad) {
      detail::add(rep, R, eval::Violation::capacity, "carried load exceeds the vehicle capacity");
      continue;
    }

    // Energy trace with direct power-model calls.
    const double E = vt.battery_kwh;
    std::vector<double> soc(seq.size());
    soc[0] = E;
    double route_energy = 0.0;
    bool soc_bad = false;
    double dwell_station = 0.0;
    for (std::size_t p = 0; p + 1 < seq.size(); ++p) {
      const double minutes = inst.travel_min(veh.type, seq[p], seq[p + 1]);
      const double kwh = energy::arc_energy_kwh(
          vt, load_on_arrival[p + 1] * inst.unit_mass_kg, sc.temperature_c, minutes / 60.0, ctx);
      route_energy += kwh;
      double y = soc[p] - kwh;
      if (node(seq[p]).kind == NodeKind::station) {
        const auto& curve = energy::ChargingFunction::for_kind(inst.chargers.at(seq[p]));
        const double before = soc[p];
        const double after = before + cr.recharge_kwh;
        if (cr.recharge_kwh < -1e-9 || after > E + 1e-9) soc_bad = true;
        const double lo = std::clamp(before, 0.0, curve.max_soc());
        const double hi = std::clamp(after, lo, curve.max_soc());
        dwell_station = curve.time_for(lo, hi);
        y += cr.recharge_kwh;
      }
      soc[p + 1] = y;
    }
    for (double y : soc)
      if (y < -1e-9) soc_bad = true;

    // Time trace.
    bool late = false;
    double tau = node(seq[0]).tw_early;
    for (std::size_t p = 1; p < seq.size(); ++p) {
      const int prev = seq[p - 1];
      const double dwell =
          node(prev).kind == NodeKind::station ? dwell_station : node(prev).service_time;
      tau = std::max(node(seq[p]).tw_early,
                     tau + dwell + inst.travel_min(veh.type, prev, seq[p]));
      if (tau > node(seq[p]).tw_late + 1e-9) late = true;
    }
    if (late) detail::add(rep, R, eval::Violation::time_window, "arrival after a window closes");
    if (soc_bad)
      detail::add(rep, R, eval::Violation::soc_negative,
                  "charge drops below zero or exceeds the battery");

    rep.recomputed.fixed += vt.fixed_cost;
    rep.recomputed.energy += vt.energy_cost_per_kwh * route_energy;
    double hours = 0.0;
    for (std::size_t p = 0; p + 1 < seq.size(); ++p)
      hours += inst.travel_min(veh.type, seq[p], seq[p + 1]) / 60.0;
    rep.recomputed.maintenance += vt.maintenance_cost_per_km * vt.speed_kmh * hours;
  }

  for (int nd : plan.unserved) {
    if (node(nd).kind != NodeKind::customer || !realized[static_cast<std::size_t>(nd)]) {
      detail::add(rep, -1, eval::Violation::depot_order,
                  "unserved entry " + std::to_string(node(nd).id) + " is not a realized customer");
      continue;
    }
    customer_uses[static_cast<std::size_t>(nd)]++;
    rep.recomputed.penalty += node(nd).penalty;
  }
  for (int nd : inst.customers) {
    if (!realized[static_cast<std::size_t>(nd)]) {
      if (customer_uses[static_cast<std::size_t>(nd)] > 0)
        detail::add(rep, -1, eval::Violation::depot_order,
                    "customer " + std::to_string(node(nd).id) + " visited but not realized");
      continue;
    }
    if (customer_uses[static_cast<std::size_t>(nd)] == 0)
      detail::add(rep, -1, eval::Violation::depot_order,
                  "realized customer " + std::to_string(node(nd).id) + " is unaccounted for");
    if (customer_uses[static_cast<std::size_t>(nd)] > 1)
      detail::add(rep, -1, eval::Violation::depot_order,
                  "customer " + std::to_string(node(nd).id) + " appears more than once");
  }
  if (plan.has_stored_cost) {
    const double diff = std::fabs(plan.stored_cost.total() - rep.recomputed.total());
    if (diff > 1e-6)
      detail::add(rep, -1, eval::Violation::depot_order,
                  "stored cost differs from the recomputed cost by " + std::to_string(diff));
  }
  return rep;
}

}  // namespace fleetmix::verify
