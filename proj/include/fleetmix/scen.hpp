#pragma once

// Scenario and instance generators: truncated-normal customer counts,
// seasonal triangular temperatures, weighted clinic selection, and two
// bundled synthetic cases (a clinic pickup case and a technician case)
// with geography of realistic scale standing in for proprietary data.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fleetmix/model.hpp"
#include "fleetmix/rng.hpp"

namespace fleetmix::scen {

// Normal draw censored into [low, high], then rounded to the nearest integer
// inside [ceil(low), floor(high)].
struct TruncatedNormalSpec {
  double mean = 0.0;
  double stddev = 1.0;
  double low = 0.0;
  double high = 1.0;

  void validate() const {
    if (!(low < high)) throw ConfigError("truncated normal needs low < high");
    if (!(stddev > 0.0)) throw ConfigError("truncated normal needs stddev > 0");
  }

  int low_int() const { return static_cast<int>(std::ceil(low)); }
  int high_int() const { return static_cast<int>(std::floor(high)); }

  int sample(Rng& rng) const {
    validate();
    const double x = std::clamp(rng.normal(mean, stddev), low, high);
    const int v = static_cast<int>(std::llround(x));
    return std::clamp(v, low_int(), high_int());
  }

  // Exact mean of sample(): sum the normal mass falling into each integer bin.
  double expected_count() const {
    validate();
    auto cdf = [this](double x) {
      return 0.5 * std::erfc(-(x - mean) / (stddev * std::sqrt(2.0)));
    };
    const int lo = low_int(), hi = high_int();
    double e = 0.0;
    for (int v = lo; v <= hi; ++v) {
      const double pl = v == lo ? 0.0 : cdf(v - 0.5);
      const double ph = v == hi ? 1.0 : cdf(v + 0.5);
      e += v * (ph - pl);
    }
    return e;
  }
};

// Triangular draw parameterized by (min, max, mean); the mode follows from
// the mean identity mode = 3*mean - min - max, clamped into [min, max].
inline double triangular_sample(double min, double max, double mean, Rng& rng) {
  if (!(min <= mean && mean <= max))
    throw ConfigError("triangular distribution needs min <= mean <= max");
  if (min == max) return min;
  const double c = std::clamp(3.0 * mean - min - max, min, max);
  const double u = rng.uniform();
  const double fc = (c - min) / (max - min);
  if (u < fc) return min + std::sqrt(u * (max - min) * (c - min));
  return max - std::sqrt((1.0 - u) * (max - min) * (max - c));
}

struct TriangularSpec {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

// Season indices used in Scenario::season.
inline constexpr int kSummer = 0;
inline constexpr int kAutumn = 1;
inline constexpr int kWinter = 2;
inline constexpr int kSpring = 3;

inline const char* season_name(int season) {
  switch (season) {
    case kSummer: return "summer";
    case kAutumn: return "autumn";
    case kWinter: return "winter";
    case kSpring: return "spring";
    default: return "unknown";
  }
}

// Four equally likely seasonal temperature distributions.
struct SeasonalTemperatureSpec {
  std::array<TriangularSpec, 4> seasons{};

  static SeasonalTemperatureSpec denmark() {
    SeasonalTemperatureSpec s;
    s.seasons[kSummer] = {13.4, 26.9, 19.5};
    s.seasons[kAutumn] = {1.2, 21.8, 10.7};
    s.seasons[kWinter] = {-7.3, 8.8, 2.3};
    s.seasons[kSpring] = {-4.0, 24.1, 8.2};
    return s;
  }
};

// Vials handled per doctor per day: summer row, then rest-of-year row,
// Monday through Friday.
inline constexpr int kVialsPerDoctor[2][5] = {{6, 6, 4, 6, 5}, {9, 8, 6, 7, 6}};

enum class DemandRule {
  clinic_vials,  // doctors x per-doctor vials of the (season, weekday) cell
  keep_base,     // use the master's node demand as-is
  zero,          // service visits without cargo
};

struct ScenarioSpec {
  TruncatedNormalSpec count;
  SeasonalTemperatureSpec temperature = SeasonalTemperatureSpec::denmark();
  DemandRule demand = DemandRule::keep_base;
};

// One operational day: draw how many customers request service, which ones,
// the season and its temperature, the weekday, and the demands. The draw
// order is fixed so common random numbers stay aligned across fleet mixes
// and across overrides applied afterwards (for example pinning temperature).
inline Scenario sample_scenario(const Instance& master, const ScenarioSpec& spec,
                                std::uint64_t seed,
                                std::vector<std::string>* warnings = nullptr) {
  Rng rng = Rng::stream(seed, {stream_tag::kScenario});
  const std::size_t n = master.customers.size();

  int count = spec.count.sample(rng);
  if (count > static_cast<int>(n)) {
    if (warnings)
      warnings->push_back("requested " + std::to_string(count) + " customers but master has " +
                          std::to_string(n) + "; clamped");
    count = static_cast<int>(n);
  }

  // Weighted selection without replacement; equal weights when the master
  // does not carry request probabilities.
  std::vector<double> weights = master.request_probabilities;
  if (weights.empty()) weights.assign(n, 1.0);
  Scenario sc;
  sc.seed = seed;
  sc.realized.assign(n, 0);
  sc.demand_override.assign(n, Scenario::no_override());
  for (int k = 0; k < count; ++k) {
    const std::size_t pick = rng.weighted_index(weights);
    sc.realized[pick] = 1;
    weights[pick] = 0.0;
  }

  sc.season = static_cast<int>(rng.bounded(4));
  const TriangularSpec& t = spec.temperature.seasons[static_cast<std::size_t>(sc.season)];
  sc.temperature_c = triangular_sample(t.min, t.max, t.mean, rng);
  sc.weekday = static_cast<int>(rng.bounded(5));

  for (std::size_t c = 0; c < n; ++c) {
    if (!sc.realized[c]) continue;
    switch (spec.demand) {
      case DemandRule::clinic_vials: {
        const Node& nd = master.nodes[static_cast<std::size_t>(master.customers[c])];
        if (nd.doctors > 0) {
          const int row = sc.season == kSummer ? 0 : 1;
          sc.demand_override[c] =
              static_cast<double>(nd.doctors * kVialsPerDoctor[row][sc.weekday]);
        }
        break;
      }
      case DemandRule::zero:
        sc.demand_override[c] = 0.0;
        break;
      case DemandRule::keep_base:
        break;
    }
  }
  return sc;
}

// ---- clinic pickup case ----------------------------------------------------

struct RegionHConfig {
  int clinics = 160;
  int vans = 15;        // master pool per type; a mix picks a subset
  int bikes = 15;
  int stations = 2;
  double shift_min = 150.0;
  double service_min = 3.0;
  double penalty_usd = 30.0;
  std::uint64_t seed = 20;  // synthetic geography
  TruncatedNormalSpec count{107.8946, 26.63986, 26.5, 145.5};
};

inline ScenarioSpec regionh_spec(const RegionHConfig& cfg = {}) {
  ScenarioSpec spec;
  spec.count = cfg.count;
  spec.demand = DemandRule::clinic_vials;
  return spec;
}

// Synthetic stand-in for the clinic pickup case: a 20 x 20 km urban area,
// two depots 4 km apart, electric pickup vans and electric cargo bikes, a
// 150 minute collection shift, and uniform request probabilities chosen so
// the stored probability equals each clinic's actual inclusion chance.
inline Instance make_regionh_master(const RegionHConfig& cfg = {}) {
  if (cfg.clinics < cfg.count.high_int())
    throw ConfigError("clinic list smaller than the maximum drawn count");
  Rng rng = Rng::stream(cfg.seed, {stream_tag::kGenerator});
  Instance inst;
  inst.name = "regionh_synthetic";
  inst.coordinate_unit = "planar_km";
  inst.direction = Direction::pickup;
  inst.unit_mass_kg = 0.05;  // one vial
  inst.triangle_inequality = true;

  Node start;
  start.id = 0;
  start.kind = NodeKind::depot_start;
  start.x = 0.0;
  start.y = 0.0;
  start.tw_late = cfg.shift_min;
  inst.nodes.push_back(start);
  Node end = start;
  end.id = 1;
  end.kind = NodeKind::depot_end;
  end.x = 4.0;  // the laboratory hospital is about four kilometers away
  end.y = 0.0;
  inst.nodes.push_back(end);

  for (int i = 0; i < cfg.clinics; ++i) {
    Node c;
    c.id = static_cast<int>(inst.nodes.size());
    c.kind = NodeKind::customer;
    c.x = rng.uniform(-8.0, 12.0);
    c.y = rng.uniform(-10.0, 10.0);
    c.tw_early = 0.0;
    c.tw_late = cfg.shift_min;
    c.service_time = cfg.service_min;
    c.penalty = cfg.penalty_usd;
    c.doctors = 1 + static_cast<int>(rng.bounded(5));  // synthetic, not survey data
    c.demand = static_cast<double>(c.doctors * kVialsPerDoctor[1][0]);
    inst.nodes.push_back(c);
  }
  for (int i = 0; i < cfg.stations; ++i) {
    Node s;
    s.id = static_cast<int>(inst.nodes.size());
    s.kind = NodeKind::station;
    s.x = rng.uniform(-2.0, 6.0);
    s.y = rng.uniform(-4.0, 4.0);
    s.tw_late = cfg.shift_min;
    inst.nodes.push_back(s);
    inst.chargers[s.id] = ChargerKind::standard_30kwh;
  }

  VehicleType van;
  van.name = "pickup_van_e";
  van.powertrain = Powertrain::ev;
  van.battery_kwh = 33.0;
  van.cargo_capacity = 720.0;
  van.speed_kmh = 45.0;
  van.kerb_mass_kg = 1426.0;
  van.additional_mass_kg = 200.0;
  van.acquisition_cost = 28223.0;
  van.energy_cost_per_kwh = 0.1973;
  van.maintenance_cost_per_km = 0.080837;
  inst.vehicle_types.push_back(van);

  VehicleType bike;
  bike.name = "cargo_bike_e";
  bike.powertrain = Powertrain::ev;
  bike.battery_kwh = 8.64;
  bike.cargo_capacity = 288.0;
  bike.speed_kmh = 40.0;
  bike.kerb_mass_kg = 322.0;
  bike.additional_mass_kg = 50.0;
  bike.frontal_area_m2 = 1.6;
  bike.drag_coefficient = 0.6;
  bike.acquisition_cost = 17900.0;
  bike.energy_cost_per_kwh = 0.1973;
  bike.maintenance_cost_per_km = 0.080837;
  bike.auxiliary_power_kw = 0.1;  // sample climate box on the traction battery
  inst.vehicle_types.push_back(bike);

  for (int i = 0; i < cfg.vans; ++i) {
    Vehicle v;
    v.id = static_cast<int>(inst.vehicles.size());
    v.type = 0;
    inst.vehicles.push_back(v);
  }
  for (int i = 0; i < cfg.bikes; ++i) {
    Vehicle v;
    v.id = static_cast<int>(inst.vehicles.size());
    v.type = 1;
    inst.vehicles.push_back(v);
  }

  const int n = inst.node_count();
  inst.travel_time.assign(inst.vehicle_types.size(), {});
  for (std::size_t t = 0; t < inst.vehicle_types.size(); ++t) {
    std::vector<double>& m = inst.travel_time[t];
    m.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double dx = inst.nodes[static_cast<std::size_t>(i)].x -
                          inst.nodes[static_cast<std::size_t>(j)].x;
        const double dy = inst.nodes[static_cast<std::size_t>(i)].y -
                          inst.nodes[static_cast<std::size_t>(j)].y;
        m[static_cast<std::size_t>(i * n + j)] =
            std::sqrt(dx * dx + dy * dy) / inst.vehicle_types[t].speed_kmh * 60.0;
      }
  }

  // Equal weights make each clinic's inclusion probability exactly
  // E[count] / clinics, so store that value as the probability.
  inst.request_probabilities.assign(static_cast<std::size_t>(cfg.clinics),
                                    cfg.count.expected_count() / cfg.clinics);
  inst.finalize();
  inst.validate();
  return inst;
}

inline Scenario sample_scenario_regionh(const Instance& master, std::uint64_t seed,
                                        std::vector<std::string>* warnings = nullptr) {
  return sample_scenario(master, regionh_spec(), seed, warnings);
}

// ---- technician routing case ------------------------------------------------

struct MthConfig {
  int customers = 520;
  int drivers = 110;
  int ev_eligible = 44;  // homes within a kilometer of a charging point
  double shift_min = 600.0;
  double penalty_usd = 30.0;
  std::uint64_t seed = 21;
  TruncatedNormalSpec count{423.3636, 34.2547, 348.0, 476.0};
};

inline ScenarioSpec mth_spec(const MthConfig& cfg = {}) {
  ScenarioSpec spec;
  spec.count = cfg.count;
  spec.demand = DemandRule::zero;
  return spec;
}

// Task levels 1..4 appear at 40/30/20/10 percent. Driver skill sets follow
// the nested ladder: handymen do only level 1, electricians level 2,
// technicians levels 2-3, classified technicians levels 3-4.
inline const std::array<std::vector<int>, 4>& mth_driver_skills() {
  static const std::array<std::vector<int>, 4> sets{
      std::vector<int>{1}, std::vector<int>{2}, std::vector<int>{2, 3},
      std::vector<int>{3, 4}};
  return sets;
}

// Synthetic stand-in for the technician routing case: a 10 hour shift,
// per-driver home start/end nodes, null demands, nested skills, and a
// subset of drivers eligible for an electric van.
inline Instance make_mth_master(const MthConfig& cfg = {}) {
  if (cfg.customers < cfg.count.high_int())
    throw ConfigError("customer list smaller than the maximum drawn count");
  if (cfg.ev_eligible > cfg.drivers)
    throw ConfigError("more electric-eligible drivers than drivers");
  Rng rng = Rng::stream(cfg.seed, {stream_tag::kGenerator});
  Instance inst;
  inst.name = "mth_synthetic";
  inst.coordinate_unit = "planar_km";
  inst.direction = Direction::delivery;
  inst.unit_mass_kg = 1.0;
  inst.triangle_inequality = true;

  for (int i = 0; i < cfg.customers; ++i) {
    Node c;
    c.id = static_cast<int>(inst.nodes.size());
    c.kind = NodeKind::customer;
    c.x = rng.uniform(-20.0, 20.0);
    c.y = rng.uniform(-20.0, 20.0);
    c.demand = 0.0;  // technicians carry their own equipment
    c.service_time = std::clamp(rng.normal(75.0, 45.0), 10.0, 240.0);
    if (c.service_time < 120.0) {
      // Short visits belong to the morning or the afternoon half-shift.
      if (rng.bounded(2) == 0) {
        c.tw_early = 0.0;
        c.tw_late = cfg.shift_min / 2.0;
      } else {
        c.tw_early = cfg.shift_min / 2.0;
        c.tw_late = cfg.shift_min;
      }
    } else {
      c.tw_early = 0.0;
      c.tw_late = cfg.shift_min;
    }
    const double u = rng.uniform();
    c.skill_requirement = u < 0.4 ? 1 : u < 0.7 ? 2 : u < 0.9 ? 3 : 4;
    c.penalty = cfg.penalty_usd;
    inst.nodes.push_back(c);
  }

  VehicleType ice;
  ice.name = "service_van_ice";
  ice.powertrain = Powertrain::icev;
  ice.battery_kwh = 500.0;  // tank energy equivalent, effectively unconstrained
  ice.cargo_capacity = 100.0;
  ice.speed_kmh = 43.2;
  ice.kerb_mass_kg = 1426.0;
  ice.additional_mass_kg = 200.0;
  ice.acquisition_cost = 22000.0;
  ice.energy_cost_per_kwh = 0.2021;
  ice.maintenance_cost_per_km = 0.115481;
  inst.vehicle_types.push_back(ice);

  VehicleType ev = ice;
  ev.name = "service_van_e";
  ev.powertrain = Powertrain::ev;
  ev.battery_kwh = 33.0;
  ev.acquisition_cost = 28223.0;
  ev.energy_cost_per_kwh = 0.1973;
  ev.maintenance_cost_per_km = 0.080837;
  inst.vehicle_types.push_back(ev);

  // One start/end node pair per driver home; the trailing pair doubles as
  // the nominal company depot required by the model.
  std::vector<int> home_start(static_cast<std::size_t>(cfg.drivers));
  std::vector<int> home_end(static_cast<std::size_t>(cfg.drivers));
  for (int d = 0; d < cfg.drivers; ++d) {
    const double hx = rng.uniform(-18.0, 18.0);
    const double hy = rng.uniform(-18.0, 18.0);
    Node hs;
    hs.id = static_cast<int>(inst.nodes.size());
    hs.kind = NodeKind::depot_start;
    hs.x = hx;
    hs.y = hy;
    hs.tw_late = cfg.shift_min;
    inst.nodes.push_back(hs);
    home_start[static_cast<std::size_t>(d)] = hs.id;
    Node he = hs;
    he.id = static_cast<int>(inst.nodes.size());
    he.kind = NodeKind::depot_end;
    inst.nodes.push_back(he);
    home_end[static_cast<std::size_t>(d)] = he.id;
  }

  // Eligibility: the first cfg.ev_eligible drivers in a shuffled order.
  std::vector<int> order(static_cast<std::size_t>(cfg.drivers));
  for (int d = 0; d < cfg.drivers; ++d) order[static_cast<std::size_t>(d)] = d;
  rng.shuffle(order);
  std::vector<std::uint8_t> eligible(static_cast<std::size_t>(cfg.drivers), 0);
  for (int k = 0; k < cfg.ev_eligible; ++k)
    eligible[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = 1;

  for (int d = 0; d < cfg.drivers; ++d) {
    const std::size_t skill_set = rng.weighted_index({0.4, 0.3, 0.2, 0.1});
    const double charger_km =
        eligible[static_cast<std::size_t>(d)] ? rng.uniform(0.05, 0.95) : rng.uniform(1.5, 9.0);
    Vehicle v;
    v.id = static_cast<int>(inst.vehicles.size());
    v.type = 0;
    v.skills = mth_driver_skills()[skill_set];
    v.home_start = home_start[static_cast<std::size_t>(d)];
    v.home_end = home_end[static_cast<std::size_t>(d)];
    v.charger_distance_km = charger_km;
    inst.vehicles.push_back(v);
    if (eligible[static_cast<std::size_t>(d)]) {
      Vehicle e = v;
      e.id = static_cast<int>(inst.vehicles.size());
      e.type = 1;
      inst.vehicles.push_back(e);
    }
  }

  const int n = inst.node_count();
  inst.travel_time.assign(inst.vehicle_types.size(), {});
  for (std::size_t t = 0; t < inst.vehicle_types.size(); ++t) {
    std::vector<double>& m = inst.travel_time[t];
    m.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double dx = inst.nodes[static_cast<std::size_t>(i)].x -
                          inst.nodes[static_cast<std::size_t>(j)].x;
        const double dy = inst.nodes[static_cast<std::size_t>(i)].y -
                          inst.nodes[static_cast<std::size_t>(j)].y;
        m[static_cast<std::size_t>(i * n + j)] =
            std::sqrt(dx * dx + dy * dy) / inst.vehicle_types[t].speed_kmh * 60.0;
      }
  }

  inst.request_probabilities.assign(static_cast<std::size_t>(cfg.customers),
                                    cfg.count.expected_count() / cfg.customers);
  inst.finalize();
  inst.validate();
  return inst;
}

inline Scenario sample_scenario_mth(const Instance& master, std::uint64_t seed,
                                    std::vector<std::string>* warnings = nullptr) {
  return sample_scenario(master, mth_spec(), seed, warnings);
}

}  // namespace fleetmix::scen
