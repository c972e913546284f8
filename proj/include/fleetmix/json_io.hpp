#pragma once

// JSON serialization for instances, scenarios and plans. Doubles survive a
// save/load round trip bit-exactly (shortest-representation printing).

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fleetmix/model.hpp"

namespace fleetmix::io {

using json = nlohmann::json;

inline std::string to_string(NodeKind k) {
  switch (k) {
    case NodeKind::depot_start: return "depot_start";
    case NodeKind::depot_end: return "depot_end";
    case NodeKind::customer: return "customer";
    case NodeKind::station: return "station";
  }
  return "customer";
}

inline NodeKind node_kind_from(const std::string& s) {
  if (s == "depot_start") return NodeKind::depot_start;
  if (s == "depot_end") return NodeKind::depot_end;
  if (s == "customer") return NodeKind::customer;
  if (s == "station") return NodeKind::station;
  throw ValidationError("unknown node kind '" + s + "'");
}

inline std::string to_string(ChargerKind k) {
  return k == ChargerKind::standard_30kwh ? "standard_30kwh" : "fast_30kwh";
}

inline ChargerKind charger_kind_from(const std::string& s) {
  if (s == "standard_30kwh") return ChargerKind::standard_30kwh;
  if (s == "fast_30kwh") return ChargerKind::fast_30kwh;
  throw ValidationError("unknown charger kind '" + s + "'");
}

inline json to_json(const Node& n) {
  json j{{"id", n.id},
         {"kind", to_string(n.kind)},
         {"x", n.x},
         {"y", n.y},
         {"tw", {n.tw_early, n.tw_late}},
         {"service_time", n.service_time}};
  if (n.kind == NodeKind::customer) {
    j["demand"] = n.demand;
    j["penalty"] = n.penalty;
    if (n.skill_requirement) j["skill"] = n.skill_requirement;
    if (n.doctors) j["doctors"] = n.doctors;
  }
  return j;
}

inline Node node_from_json(const json& j) {
  Node n;
  n.id = j.at("id").get<int>();
  n.kind = node_kind_from(j.at("kind").get<std::string>());
  n.x = j.value("x", 0.0);
  n.y = j.value("y", 0.0);
  if (j.contains("tw")) {
    n.tw_early = j["tw"].at(0).get<double>();
    n.tw_late = j["tw"].at(1).get<double>();
  }
  n.service_time = j.value("service_time", 0.0);
  n.demand = j.value("demand", 0.0);
  n.penalty = j.value("penalty", 0.0);
  n.skill_requirement = j.value("skill", 0);
  n.doctors = j.value("doctors", 0);
  return n;
}

inline json to_json(const VehicleType& t) {
  json j{{"name", t.name},
         {"powertrain", t.powertrain == Powertrain::ev ? "ev" : "icev"},
         {"battery_kwh", t.battery_kwh},
         {"cargo_capacity", t.cargo_capacity},
         {"speed_kmh", t.speed_kmh},
         {"kerb_mass_kg", t.kerb_mass_kg},
         {"additional_mass_kg", t.additional_mass_kg},
         {"frontal_area_m2", t.frontal_area_m2},
         {"drag_coefficient", t.drag_coefficient},
         {"acquisition_cost", t.acquisition_cost},
         {"fixed_cost", t.fixed_cost},
         {"energy_cost_per_kwh", t.energy_cost_per_kwh},
         {"maintenance_cost_per_km", t.maintenance_cost_per_km},
         {"auxiliary_power_kw", t.auxiliary_power_kw}};
  if (t.powertrain == Powertrain::icev) {
    j["engine"] = {{"friction_factor", t.engine.friction_factor},
                   {"engine_speed", t.engine.engine_speed},
                   {"displacement", t.engine.displacement},
                   {"eta_engine", t.engine.eta_engine},
                   {"eta_drivetrain", t.engine.eta_drivetrain}};
  }
  return j;
}

inline VehicleType vehicle_type_from_json(const json& j) {
  VehicleType t;
  t.name = j.at("name").get<std::string>();
  const std::string pt = j.at("powertrain").get<std::string>();
  if (pt == "ev") {
    t.powertrain = Powertrain::ev;
  } else if (pt == "icev") {
    t.powertrain = Powertrain::icev;
  } else {
    throw ValidationError("unknown powertrain '" + pt + "'");
  }
  t.battery_kwh = j.value("battery_kwh", 0.0);
  t.cargo_capacity = j.value("cargo_capacity", 0.0);
  t.speed_kmh = j.at("speed_kmh").get<double>();
  t.kerb_mass_kg = j.value("kerb_mass_kg", 0.0);
  t.additional_mass_kg = j.value("additional_mass_kg", 0.0);
  t.frontal_area_m2 = j.value("frontal_area_m2", 4.06);
  t.drag_coefficient = j.value("drag_coefficient", 0.34);
  t.acquisition_cost = j.value("acquisition_cost", 0.0);
  t.fixed_cost = j.value("fixed_cost", 0.0);
  t.energy_cost_per_kwh = j.value("energy_cost_per_kwh", 0.0);
  t.maintenance_cost_per_km = j.value("maintenance_cost_per_km", 0.0);
  t.auxiliary_power_kw = j.value("auxiliary_power_kw", 0.0);
  if (j.contains("engine")) {
    const json& e = j["engine"];
    t.engine.friction_factor = e.value("friction_factor", 0.2);
    t.engine.engine_speed = e.value("engine_speed", 33.0);
    t.engine.displacement = e.value("displacement", 1.6);
    t.engine.eta_engine = e.value("eta_engine", 0.9);
    t.engine.eta_drivetrain = e.value("eta_drivetrain", 0.4);
  }
  return t;
}

inline json to_json(const Instance& inst) {
  json nodes = json::array();
  for (const Node& n : inst.nodes) nodes.push_back(to_json(n));
  json types = json::array();
  for (const VehicleType& t : inst.vehicle_types) types.push_back(to_json(t));
  json vehicles = json::array();
  for (const Vehicle& v : inst.vehicles) {
    json jv{{"id", v.id}, {"type", inst.vehicle_types[static_cast<std::size_t>(v.type)].name}};
    if (!v.skills.empty()) jv["skills"] = v.skills;
    if (v.home_start) jv["home_start"] = *v.home_start;
    if (v.home_end) jv["home_end"] = *v.home_end;
    if (v.charger_distance_km != 0.0) jv["charger_distance_km"] = v.charger_distance_km;
    vehicles.push_back(jv);
  }
  json tt = json::object();
  const int n = inst.node_count();
  for (std::size_t t = 0; t < inst.vehicle_types.size(); ++t) {
    json rows = json::array();
    for (int i = 0; i < n; ++i) {
      json row = json::array();
      for (int j = 0; j < n; ++j) row.push_back(inst.travel_time[t][static_cast<std::size_t>(i * n + j)]);
      rows.push_back(std::move(row));
    }
    tt[inst.vehicle_types[t].name] = std::move(rows);
  }
  json chargers = json::object();
  for (const auto& [node, kind] : inst.chargers)
    chargers[std::to_string(inst.nodes[static_cast<std::size_t>(node)].id)] = to_string(kind);
  json j{{"name", inst.name},
         {"coordinate_unit", inst.coordinate_unit},
         {"direction", inst.direction == Direction::pickup ? "pickup" : "delivery"},
         {"unit_mass_kg", inst.unit_mass_kg},
         {"triangle_inequality", inst.triangle_inequality},
         {"nodes", std::move(nodes)},
         {"vehicle_types", std::move(types)},
         {"vehicles", std::move(vehicles)},
         {"travel_time", std::move(tt)},
         {"chargers", std::move(chargers)}};
  if (!inst.request_probabilities.empty()) j["request_probabilities"] = inst.request_probabilities;
  return j;
}

inline Instance instance_from_json(const json& j) {
  Instance inst;
  inst.name = j.value("name", "unnamed");
  inst.coordinate_unit = j.value("coordinate_unit", "planar_m");
  const std::string dir = j.value("direction", "pickup");
  if (dir == "pickup") {
    inst.direction = Direction::pickup;
  } else if (dir == "delivery") {
    inst.direction = Direction::delivery;
  } else {
    throw ValidationError("instance '" + inst.name + "': unknown direction '" + dir + "'");
  }
  inst.unit_mass_kg = j.value("unit_mass_kg", 0.0);
  inst.triangle_inequality = j.value("triangle_inequality", false);
  if (!j.contains("nodes")) throw ValidationError("instance '" + inst.name + "': missing nodes");
  for (const json& nj : j["nodes"]) inst.nodes.push_back(node_from_json(nj));
  if (!j.contains("vehicle_types"))
    throw ValidationError("instance '" + inst.name + "': missing vehicle_types");
  for (const json& tj : j["vehicle_types"]) inst.vehicle_types.push_back(vehicle_type_from_json(tj));
  auto type_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < inst.vehicle_types.size(); ++i)
      if (inst.vehicle_types[i].name == name) return static_cast<int>(i);
    throw ValidationError("instance '" + inst.name + "': unknown vehicle type '" + name + "'");
  };
  if (!j.contains("vehicles")) throw ValidationError("instance '" + inst.name + "': missing vehicles");
  for (const json& vj : j["vehicles"]) {
    Vehicle v;
    v.id = vj.at("id").get<int>();
    v.type = type_index(vj.at("type").get<std::string>());
    if (vj.contains("skills")) v.skills = vj["skills"].get<std::vector<int>>();
    if (vj.contains("home_start")) v.home_start = vj["home_start"].get<int>();
    if (vj.contains("home_end")) v.home_end = vj["home_end"].get<int>();
    v.charger_distance_km = vj.value("charger_distance_km", 0.0);
    inst.vehicles.push_back(v);
  }
  const int n = inst.node_count();
  if (!j.contains("travel_time"))
    throw ValidationError("instance '" + inst.name + "': missing travel_time");
  inst.travel_time.assign(inst.vehicle_types.size(), {});
  for (std::size_t t = 0; t < inst.vehicle_types.size(); ++t) {
    const std::string& tn = inst.vehicle_types[t].name;
    if (!j["travel_time"].contains(tn))
      throw ValidationError("instance '" + inst.name + "': travel_time missing type '" + tn + "'");
    const json& rows = j["travel_time"][tn];
    std::vector<double>& m = inst.travel_time[t];
    m.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (const json& row : rows)
      for (const json& cell : row) m.push_back(cell.get<double>());
  }
  // Map external node ids used as charger keys back to node indices.
  std::map<int, int> id_to_index;
  for (int i = 0; i < n; ++i) id_to_index[inst.nodes[static_cast<std::size_t>(i)].id] = i;
  if (j.contains("chargers")) {
    for (const auto& [key, val] : j["chargers"].items()) {
      const int ext_id = std::stoi(key);
      auto it = id_to_index.find(ext_id);
      if (it == id_to_index.end())
        throw ValidationError("instance '" + inst.name + "': charger on unknown node id " + key);
      inst.chargers[it->second] = charger_kind_from(val.get<std::string>());
    }
  }
  if (j.contains("request_probabilities"))
    inst.request_probabilities = j["request_probabilities"].get<std::vector<double>>();
  inst.finalize();
  inst.validate();
  return inst;
}

inline json to_json(const Instance& inst, const Scenario& sc) {
  json realized = json::array();
  json overrides = json::object();
  for (std::size_t c = 0; c < inst.customers.size(); ++c) {
    if (c < sc.realized.size() && sc.realized[c]) {
      const int node = inst.customers[c];
      realized.push_back(inst.nodes[static_cast<std::size_t>(node)].id);
      if (c < sc.demand_override.size() && !std::isnan(sc.demand_override[c]))
        overrides[std::to_string(inst.nodes[static_cast<std::size_t>(node)].id)] =
            sc.demand_override[c];
    }
  }
  json j{{"seed", sc.seed},
         {"temperature_c", sc.temperature_c},
         {"realized", std::move(realized)}};
  if (!overrides.empty()) j["demand_overrides"] = std::move(overrides);
  if (sc.season >= 0) j["season"] = sc.season;
  if (sc.weekday >= 0) j["weekday"] = sc.weekday;
  return j;
}

inline Scenario scenario_from_json(const Instance& inst, const json& j) {
  Scenario sc;
  sc.seed = j.value("seed", std::uint64_t{0});
  sc.temperature_c = j.at("temperature_c").get<double>();
  sc.season = j.value("season", -1);
  sc.weekday = j.value("weekday", -1);
  sc.realized.assign(inst.customers.size(), 0);
  sc.demand_override.assign(inst.customers.size(), Scenario::no_override());
  std::map<int, std::size_t> id_to_pos;
  for (std::size_t c = 0; c < inst.customers.size(); ++c)
    id_to_pos[inst.nodes[static_cast<std::size_t>(inst.customers[c])].id] = c;
  for (const json& idj : j.at("realized")) {
    auto it = id_to_pos.find(idj.get<int>());
    if (it == id_to_pos.end())
      throw ValidationError("scenario: realized id " + idj.dump() + " is not a customer");
    sc.realized[it->second] = 1;
  }
  if (j.contains("demand_overrides")) {
    for (const auto& [key, val] : j["demand_overrides"].items()) {
      auto it = id_to_pos.find(std::stoi(key));
      if (it == id_to_pos.end())
        throw ValidationError("scenario: demand override for unknown customer id " + key);
      sc.demand_override[it->second] = val.get<double>();
    }
  }
  return sc;
}

// Plans are stored with external node ids. Routes normally carry a
// `sequence`; an explicit `arcs` form is accepted for verification inputs
// that cannot be expressed as a path.
struct StoredRoute {
  int vehicle = -1;
  std::vector<int> sequence;                 // node indices (internal)
  std::vector<std::pair<int, int>> arcs;     // node indices; used when sequence empty
  double recharge_kwh = 0.0;
};

struct StoredSolution {
  std::vector<StoredRoute> routes;
  std::vector<int> unserved;                 // node indices
  CostBreakdown cost;
  json scenario;                             // embedded scenario document
  json config;                               // resolved run config
};

inline json to_json(const Instance& inst, const Solution& sol, const Scenario& sc,
                    const json& config) {
  auto ext = [&](int node) { return inst.nodes[static_cast<std::size_t>(node)].id; };
  json routes = json::array();
  for (const Route& r : sol.routes) {
    json seq = json::array();
    for (int nd : r.sequence) seq.push_back(ext(nd));
    routes.push_back(json{{"vehicle", r.vehicle},
                          {"sequence", std::move(seq)},
                          {"recharge_kwh", r.recharge_kwh}});
  }
  json unserved = json::array();
  for (int nd : sol.unserved) unserved.push_back(ext(nd));
  return json{{"instance", inst.name},
              {"config", config},
              {"scenario", to_json(inst, sc)},
              {"routes", std::move(routes)},
              {"unserved", std::move(unserved)},
              {"cost",
               {{"fixed", sol.cost.fixed},
                {"energy", sol.cost.energy},
                {"maintenance", sol.cost.maintenance},
                {"penalty", sol.cost.penalty},
                {"total", sol.cost.total()}}}};
}

inline StoredSolution solution_from_json(const Instance& inst, const json& j) {
  std::map<int, int> id_to_index;
  for (int i = 0; i < inst.node_count(); ++i)
    id_to_index[inst.nodes[static_cast<std::size_t>(i)].id] = i;
  auto to_index = [&](int ext_id) {
    auto it = id_to_index.find(ext_id);
    if (it == id_to_index.end())
      throw ValidationError("solution references unknown node id " + std::to_string(ext_id));
    return it->second;
  };
  StoredSolution out;
  for (const json& rj : j.at("routes")) {
    StoredRoute r;
    r.vehicle = rj.at("vehicle").get<int>();
    if (rj.contains("sequence"))
      for (const json& nj : rj["sequence"]) r.sequence.push_back(to_index(nj.get<int>()));
    if (rj.contains("arcs"))
      for (const json& aj : rj["arcs"])
        r.arcs.emplace_back(to_index(aj.at(0).get<int>()), to_index(aj.at(1).get<int>()));
    r.recharge_kwh = rj.value("recharge_kwh", 0.0);
    out.routes.push_back(std::move(r));
  }
  if (j.contains("unserved"))
    for (const json& nj : j["unserved"]) out.unserved.push_back(to_index(nj.get<int>()));
  if (j.contains("cost")) {
    out.cost.fixed = j["cost"].value("fixed", 0.0);
    out.cost.energy = j["cost"].value("energy", 0.0);
    out.cost.maintenance = j["cost"].value("maintenance", 0.0);
    out.cost.penalty = j["cost"].value("penalty", 0.0);
  }
  if (j.contains("scenario")) out.scenario = j["scenario"];
  if (j.contains("config")) out.config = j["config"];
  return out;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("malformed JSON in '" + path + "': " + e.what());
  }
  return j;
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

inline Instance load_instance(const std::string& path) {
  return instance_from_json(read_json_file(path));
}

inline void save_instance(const std::string& path, const Instance& inst) {
  write_json_file(path, to_json(inst));
}

}  // namespace fleetmix::io
