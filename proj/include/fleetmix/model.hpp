#pragma once

// Core problem data: nodes, vehicle types, the master vehicle list, travel
// times per type, demand scenarios, fleet selections, routes and plans.
// Times are stored in minutes throughout; conversions to hours happen at the
// point of use (energy/cost integration).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fleetmix {

// Configuration problems (bad parameters, malformed requests): CLI exit 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Data violating the model contract (instance invariants, solution files
// that fail verification): CLI exit 3.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class NodeKind { depot_start, depot_end, customer, station };

enum class ChargerKind { standard_30kwh, fast_30kwh };

enum class Powertrain { ev, icev };

enum class Direction { pickup, delivery };

struct Node {
  int id = 0;
  NodeKind kind = NodeKind::customer;
  double x = 0.0;
  double y = 0.0;
  double demand = 0.0;        // cargo units
  double tw_early = 0.0;      // minutes
  double tw_late = 0.0;       // minutes
  double service_time = 0.0;  // minutes
  double penalty = 0.0;       // USD if skipped (customers)
  int skill_requirement = 0;  // 0 = none
  int doctors = 0;            // demand multiplier used by clinic-style sampling

  bool operator==(const Node&) const = default;
};

// Combustion-engine parameters for the fuel-power floor.
struct EngineParams {
  double friction_factor = 0.2;   // kJ / (rev * liter)
  double engine_speed = 33.0;     // rev / s
  double displacement = 1.6;      // liters
  double eta_engine = 0.9;
  double eta_drivetrain = 0.4;

  bool operator==(const EngineParams&) const = default;
};

struct VehicleType {
  std::string name;
  Powertrain powertrain = Powertrain::ev;
  double battery_kwh = 0.0;            // usable energy E_k (fuel-equivalent for ICEV)
  double cargo_capacity = 0.0;         // units
  double speed_kmh = 0.0;
  double kerb_mass_kg = 0.0;
  double additional_mass_kg = 0.0;     // driver + fittings
  double frontal_area_m2 = 4.06;
  double drag_coefficient = 0.34;
  double acquisition_cost = 0.0;       // USD, first-stage
  double fixed_cost = 0.0;             // USD per period if the vehicle is used
  double energy_cost_per_kwh = 0.0;    // USD
  double maintenance_cost_per_km = 0.0;// USD
  double auxiliary_power_kw = 0.0;
  EngineParams engine;                 // ICEV only

  bool operator==(const VehicleType&) const = default;
};

struct Vehicle {
  int id = 0;
  int type = 0;                        // index into vehicle_types
  std::vector<int> skills;             // empty = compatible with everything
  std::optional<int> home_start;       // node index; default depot pair
  std::optional<int> home_end;
  double charger_distance_km = 0.0;    // home-to-charger distance, EV eligibility order

  bool operator==(const Vehicle&) const = default;
};

struct Instance {
  std::string name;
  std::string coordinate_unit = "planar_m";
  Direction direction = Direction::pickup;
  double unit_mass_kg = 0.0;           // cargo-unit -> kg conversion
  bool triangle_inequality = false;

  std::vector<Node> nodes;             // any order; kinds classify
  std::vector<VehicleType> vehicle_types;
  std::vector<Vehicle> vehicles;       // master list
  // travel_time[type][i * n + j], minutes, dense per vehicle type.
  std::vector<std::vector<double>> travel_time;
  std::map<int, ChargerKind> chargers;             // station node index -> kind
  std::vector<double> request_probabilities;       // per customer list entry

  // Derived indices (filled by finalize()).
  int depot_start = -1;
  int depot_end = -1;
  std::vector<int> customers;          // node indices
  std::vector<int> stations;           // node indices

  bool operator==(const Instance& o) const {
    return name == o.name && coordinate_unit == o.coordinate_unit &&
           direction == o.direction && unit_mass_kg == o.unit_mass_kg &&
           triangle_inequality == o.triangle_inequality && nodes == o.nodes &&
           vehicle_types == o.vehicle_types && vehicles == o.vehicles &&
           travel_time == o.travel_time && chargers == o.chargers &&
           request_probabilities == o.request_probabilities;
  }

  int node_count() const { return static_cast<int>(nodes.size()); }

  double travel_min(int type, int i, int j) const {
    return travel_time[static_cast<std::size_t>(type)]
                      [static_cast<std::size_t>(i) * nodes.size() + static_cast<std::size_t>(j)];
  }

  const VehicleType& type_of(const Vehicle& v) const {
    return vehicle_types[static_cast<std::size_t>(v.type)];
  }

  // Populates derived indices; call after constructing or loading.
  void finalize() {
    depot_start = depot_end = -1;
    customers.clear();
    stations.clear();
    for (int i = 0; i < node_count(); ++i) {
      switch (nodes[static_cast<std::size_t>(i)].kind) {
        case NodeKind::depot_start: depot_start = i; break;
        case NodeKind::depot_end: depot_end = i; break;
        case NodeKind::customer: customers.push_back(i); break;
        case NodeKind::station: stations.push_back(i); break;
      }
    }
  }

  void validate() const {
    if (depot_start < 0 || depot_end < 0)
      throw ValidationError("instance '" + name + "': missing depot pair");
    if (vehicle_types.empty()) throw ValidationError("instance '" + name + "': no vehicle types");
    if (travel_time.size() != vehicle_types.size())
      throw ValidationError("instance '" + name + "': travel_time must cover every vehicle type");
    const std::size_t n2 = nodes.size() * nodes.size();
    for (std::size_t t = 0; t < travel_time.size(); ++t) {
      if (travel_time[t].size() != n2)
        throw ValidationError("instance '" + name + "': travel_time for type '" +
                              vehicle_types[t].name + "' is not " + std::to_string(nodes.size()) +
                              "x" + std::to_string(nodes.size()));
      for (double v : travel_time[t])
        if (!(v >= 0.0) || !std::isfinite(v))
          throw ValidationError("instance '" + name + "': negative or non-finite travel time");
    }
    for (const Node& nd : nodes) {
      if (nd.tw_early > nd.tw_late)
        throw ValidationError("instance '" + name + "': node " + std::to_string(nd.id) +
                              " has time window start after end");
      if (nd.service_time < 0.0 || nd.demand < 0.0)
        throw ValidationError("instance '" + name + "': node " + std::to_string(nd.id) +
                              " has negative service time or demand");
    }
    if (!request_probabilities.empty() && request_probabilities.size() != customers.size())
      throw ValidationError("instance '" + name +
                            "': request_probabilities must match the customer count");
    for (double p : request_probabilities)
      if (p < 0.0 || p > 1.0)
        throw ValidationError("instance '" + name + "': request probability outside [0,1]");
    for (const Vehicle& v : vehicles) {
      if (v.type < 0 || v.type >= static_cast<int>(vehicle_types.size()))
        throw ValidationError("instance '" + name + "': vehicle " + std::to_string(v.id) +
                              " references unknown type");
    }
    for (const auto& [node, kind] : chargers) {
      (void)kind;
      if (node < 0 || node >= node_count() ||
          nodes[static_cast<std::size_t>(node)].kind != NodeKind::station)
        throw ValidationError("instance '" + name + "': charger on non-station node " +
                              std::to_string(node));
    }
    for (int s : stations)
      if (!chargers.count(s))
        throw ValidationError("instance '" + name + "': station node " +
                              std::to_string(nodes[static_cast<std::size_t>(s)].id) +
                              " has no charger kind");
  }
};

// Second-stage scenario: which customers materialized, ambient temperature,
// and optional per-customer demand overrides (units).
struct Scenario {
  std::uint64_t seed = 0;
  double temperature_c = 20.0;
  std::vector<std::uint8_t> realized;          // parallel to instance.customers
  std::vector<double> demand_override;         // parallel to customers; NaN = keep base
  int season = -1;                             // informational
  int weekday = -1;

  static double no_override() { return std::numeric_limits<double>::quiet_NaN(); }
};

// First-stage decision: which master vehicles are owned.
struct FleetMix {
  std::vector<std::uint8_t> membership;        // parallel to instance.vehicles

  std::vector<int> selected() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < membership.size(); ++i)
      if (membership[i]) out.push_back(static_cast<int>(i));
    return out;
  }

  int count() const {
    int c = 0;
    for (auto m : membership) c += m;
    return c;
  }

  bool operator==(const FleetMix&) const = default;
};

inline std::vector<int> counts_per_type(const Instance& inst, const FleetMix& mix) {
  std::vector<int> counts(inst.vehicle_types.size(), 0);
  for (std::size_t i = 0; i < mix.membership.size(); ++i)
    if (mix.membership[i]) counts[static_cast<std::size_t>(inst.vehicles[i].type)]++;
  return counts;
}

// One vehicle's tour. `sequence` holds node indices from the start depot to
// the end depot; `recharge_kwh` is the amount taken on at the (single)
// station visit, if any.
struct Route {
  int vehicle = -1;
  std::vector<int> sequence;
  double recharge_kwh = 0.0;

  bool operator==(const Route&) const = default;
};

struct CostBreakdown {
  double fixed = 0.0;
  double energy = 0.0;
  double maintenance = 0.0;
  double penalty = 0.0;

  double total() const { return fixed + energy + maintenance + penalty; }

  bool operator==(const CostBreakdown&) const = default;
};

struct Solution {
  std::vector<Route> routes;        // used vehicles only; unused ones carry no route
  std::vector<int> unserved;        // customer node indices
  CostBreakdown cost;

  void sort_canonical() {
    std::sort(routes.begin(), routes.end(),
              [](const Route& a, const Route& b) { return a.vehicle < b.vehicle; });
    std::sort(unserved.begin(), unserved.end());
  }
};

// Compatibility a_ik: a customer with a skill requirement needs a vehicle
// whose skill list contains it; vehicles with an empty list take anything.
inline bool compatible(const Node& customer, const Vehicle& vehicle) {
  if (customer.skill_requirement == 0) return true;
  if (vehicle.skills.empty()) return true;
  return std::find(vehicle.skills.begin(), vehicle.skills.end(),
                   customer.skill_requirement) != vehicle.skills.end();
}

// Per-vehicle arc structure. Arcs are the complete digraph over the vehicle's
// admissible nodes minus self-loops, arcs into the start depot, and arcs out
// of the end depot. Stations are admissible only for EVs; customers only when
// compatible.
class ArcSet {
 public:
  ArcSet(const Instance& inst, const FleetMix& mix) : inst_(&inst) {
    const int n = inst.node_count();
    for (int v = 0; v < static_cast<int>(inst.vehicles.size()); ++v) {
      std::vector<std::uint8_t> adm(static_cast<std::size_t>(n), 0);
      if (!mix.membership.empty() && !mix.membership[static_cast<std::size_t>(v)]) {
        admissible_.push_back(std::move(adm));
        continue;
      }
      const Vehicle& veh = inst.vehicles[static_cast<std::size_t>(v)];
      const bool is_ev = inst.type_of(veh).powertrain == Powertrain::ev;
      for (int i = 0; i < n; ++i) {
        const Node& nd = inst.nodes[static_cast<std::size_t>(i)];
        switch (nd.kind) {
          case NodeKind::depot_start:
          case NodeKind::depot_end: adm[static_cast<std::size_t>(i)] = 1; break;
          case NodeKind::customer:
            adm[static_cast<std::size_t>(i)] = compatible(nd, veh) ? 1 : 0;
            break;
          case NodeKind::station: adm[static_cast<std::size_t>(i)] = is_ev ? 1 : 0; break;
        }
      }
      admissible_.push_back(std::move(adm));
    }
  }

  bool node_allowed(int vehicle, int node) const {
    return admissible_[static_cast<std::size_t>(vehicle)][static_cast<std::size_t>(node)] != 0;
  }

  bool allowed(int vehicle, int i, int j) const {
    if (i == j) return false;
    if (j == inst_->depot_start || i == inst_->depot_end) return false;
    return node_allowed(vehicle, i) && node_allowed(vehicle, j);
  }

  std::vector<std::pair<int, int>> arcs(int vehicle) const {
    std::vector<std::pair<int, int>> out;
    const int n = inst_->node_count();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (allowed(vehicle, i, j)) out.emplace_back(i, j);
    return out;
  }

 private:
  const Instance* inst_;
  std::vector<std::vector<std::uint8_t>> admissible_;
};

inline ArcSet build_arc_set(const Instance& inst, const FleetMix& mix) {
  return ArcSet(inst, mix);
}

inline FleetMix full_mix(const Instance& inst) {
  FleetMix m;
  m.membership.assign(inst.vehicles.size(), 1);
  return m;
}

// Realized demand in cargo units for a customer node under a scenario.
inline double scenario_demand(const Instance& inst, const Scenario& sc, int customer_pos) {
  if (customer_pos < static_cast<int>(sc.demand_override.size())) {
    const double d = sc.demand_override[static_cast<std::size_t>(customer_pos)];
    if (!std::isnan(d)) return d;
  }
  return inst.nodes[static_cast<std::size_t>(inst.customers[static_cast<std::size_t>(customer_pos)])].demand;
}

}  // namespace fleetmix
