#pragma once

// Vehicle power model and station charging curves. Power is split into a
// mechanical part (affine in total mass), a cabin-climate part driven by the
// ambient temperature, and a constant auxiliary draw. EVs scale the sum by
// discharge/recuperation efficiency chains; combustion vehicles burn fuel for
// the mechanical part on top of an idle floor and never drop below zero.

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fleetmix/model.hpp"

namespace fleetmix::energy {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }

// One cabin surface exchanging heat / admitting solar radiation.
struct Surface {
  std::string name;
  double area_m2 = 0.0;
  double transmittance = 0.8;           // tau_i
  double heat_transfer_kw_m2k = 0.003;  // U_i
  double tilt_rad = 0.0;                // Sigma_i

  bool operator==(const Surface&) const = default;
};

inline std::vector<Surface> default_cabin_surfaces() {
  // Two side windows; total glazed+roof area 4 m^2.
  return {
      {"windshield", 1.0, 0.8, 0.003, 0.0},
      {"window_left", 0.6, 0.8, 0.003, 0.0},
      {"window_right", 0.6, 0.8, 0.003, 0.0},
      {"rear", 0.8, 0.8, 0.003, 0.0},
      {"roof", 1.0, 0.8, 0.003, 0.0},
  };
}

struct PowerContext {
  // Mechanical.
  double rolling_resistance = 0.01;   // c_r
  double road_gradient_rad = 0.0;     // alpha
  double air_density_kg_m3 = 1.2041;  // rho_a
  double gravity_m_s2 = 9.81;
  double acceleration_m_s2 = 0.01;

  // EV efficiency chains (engine x external, discharge vs recuperation).
  double ev_engine_discharge = 1.184692;
  double ev_engine_recuperation = 0.846055;
  double ev_external_discharge = 1.112434;
  double ev_external_recuperation = 0.928465;

  // Climate.
  double solar_apparent_irradiance_kw_m2 = 1.088;  // A
  double solar_extinction = 0.205;                 // B
  double solar_diffuse_factor = 0.134;             // C
  double zenith_angle_rad = deg2rad(35.0);         // theta_z
  double incidence_angle_rad = deg2rad(55.0);      // theta_i
  double ground_reflectivity = 0.2;                // rho_g
  std::vector<Surface> surfaces = default_cabin_surfaces();
  double air_specific_heat_kj_kgk = 1.005;  // C_P
  double heater_cop = 2.5;                  // eta_H
  double cooler_cop = 2.5;                  // eta_C
  double air_flow_kg_s = 0.3185;            // m_dot
  double metabolic_rate_w_m2 = 58.2;        // H_Pr
  double body_area_m2 = 1.8;                // A_Du
  int passengers = 1;
  double cabin_temp_c = 20.0;               // T_d

  double discharge_factor() const { return ev_engine_discharge * ev_external_discharge; }
  double recuperation_factor() const { return ev_engine_recuperation * ev_external_recuperation; }
};

// Direct normal irradiance from the clear-sky exponential model, kW/m^2.
inline double direct_normal_irradiance(const PowerContext& ctx) {
  const double cz = std::cos(ctx.zenith_angle_rad);
  if (cz <= 0.0)
    throw std::domain_error("direct_normal_irradiance: sun below horizon (cos(zenith) <= 0)");
  return ctx.solar_apparent_irradiance_kw_m2 * std::exp(-ctx.solar_extinction / cz);
}

// Tractive power at the wheels converted to kW; affine in total mass.
inline double mechanical_power_kw(const VehicleType& vt, double load_kg, const PowerContext& ctx) {
  const double m = vt.kerb_mass_kg + vt.additional_mass_kg + load_kg;
  const double v = vt.speed_kmh / 3.6;
  const double rolling = ctx.rolling_resistance * m * ctx.gravity_m_s2 * std::cos(ctx.road_gradient_rad);
  const double drag = 0.5 * ctx.air_density_kg_m3 * vt.frontal_area_m2 * vt.drag_coefficient * v * v;
  const double grade = m * ctx.gravity_m_s2 * std::sin(ctx.road_gradient_rad);
  const double inertia = m * ctx.acceleration_m_s2;
  return 0.001 * (rolling + drag + grade + inertia) * v;
}

// Cabin climate power at ambient temperature T. Heating below the cabin
// setpoint (ventilation + envelope losses), cooling above it (plus solar and
// metabolic gains), zero at the setpoint.
inline double climate_power_kw(const PowerContext& ctx, double ambient_c) {
  const double dT = ambient_c - ctx.cabin_temp_c;
  if (dT == 0.0) return 0.0;
  double envelope = 0.0;
  for (const Surface& s : ctx.surfaces) envelope += s.area_m2 * s.heat_transfer_kw_m2k;
  envelope *= std::fabs(dT);
  const double ventilation = ctx.air_flow_kg_s * ctx.air_specific_heat_kj_kgk * std::fabs(dT);
  if (dT < 0.0) return (ventilation + envelope) / ctx.heater_cop;

  const double idn = direct_normal_irradiance(ctx);
  const double cz = std::cos(ctx.zenith_angle_rad);
  const double ci = std::cos(ctx.incidence_angle_rad);
  double solar = 0.0;
  for (const Surface& s : ctx.surfaces) {
    const double ct = std::cos(s.tilt_rad);
    const double geometry = ci + ctx.solar_diffuse_factor * (1.0 + ct) / 2.0 +
                            ctx.ground_reflectivity * cz * (1.0 - ct) / 2.0;
    solar += s.area_m2 * s.transmittance * idn * geometry;
  }
  const double metabolic = ctx.passengers * ctx.metabolic_rate_w_m2 * ctx.body_area_m2 / 1000.0;
  return (ventilation + envelope + solar + metabolic) / ctx.cooler_cop;
}

// Net power drawn from the energy store while traversing an arc, kW.
// EV: (mechanical + climate + auxiliary) scaled by the discharge chain, or by
// the recuperation chain when the raw sum is negative (downhill). ICEV: idle
// friction floor plus mechanical over engine and drivetrain efficiency,
// never negative; climate and auxiliary loads are not modeled for ICEVs.
inline double vehicle_power_kw(const VehicleType& vt, double load_kg, double ambient_c,
                               const PowerContext& ctx) {
  const double pm = mechanical_power_kw(vt, load_kg, ctx);
  if (vt.powertrain == Powertrain::ev) {
    const double p = pm + climate_power_kw(ctx, ambient_c) + vt.auxiliary_power_kw;
    return p >= 0.0 ? ctx.discharge_factor() * p : ctx.recuperation_factor() * p;
  }
  const EngineParams& e = vt.engine;
  const double idle = e.friction_factor * e.engine_speed * e.displacement;
  return std::max(idle + pm / (e.eta_engine * e.eta_drivetrain), 0.0);
}

// Energy drawn while traversing one arc, kWh. `load_kg` is the cargo mass on
// arrival at the arc's head; `hours` the arc travel time.
inline double arc_energy_kwh(const VehicleType& vt, double load_kg, double ambient_c,
                             double hours, const PowerContext& ctx) {
  return vehicle_power_kw(vt, load_kg, ambient_c, ctx) * hours;
}

// Piecewise-linear concave charging curve: state of charge reached after t
// minutes at the station, starting from empty. Slopes strictly decrease.
class ChargingFunction {
 public:
  ChargingFunction(std::string name, std::vector<std::pair<double, double>> points)
      : name_(std::move(name)), points_(std::move(points)) {
    if (points_.size() < 2 || points_.front().first != 0.0 || points_.front().second != 0.0)
      throw ConfigError("charging function '" + name_ + "' must start at (0, 0)");
    double prev_slope = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < points_.size(); ++i) {
      const double dt = points_[i].first - points_[i - 1].first;
      const double ds = points_[i].second - points_[i - 1].second;
      if (dt <= 0.0 || ds <= 0.0)
        throw ConfigError("charging function '" + name_ + "' must be strictly increasing");
      const double slope = ds / dt;
      if (slope >= prev_slope)
        throw ConfigError("charging function '" + name_ + "' must have strictly decreasing slopes");
      prev_slope = slope;
    }
  }

  // Builds a curve from per-segment lines soc = slope*t + intercept valid up
  // to t_end; adjacent segments must agree at the junction within 1e-6 kWh.
  struct Segment {
    double slope = 0.0;
    double intercept = 0.0;
    double t_end = 0.0;
  };
  static ChargingFunction from_segments(std::string name, const std::vector<Segment>& segs) {
    if (segs.empty()) throw ConfigError("charging function '" + name + "': no segments");
    if (std::fabs(segs.front().intercept) > 1e-6)
      throw ConfigError("charging function '" + name + "': first segment must pass through 0");
    std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
    double t_prev = 0.0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const Segment& s = segs[i];
      const double end_val = s.slope * s.t_end + s.intercept;
      if (i + 1 < segs.size()) {
        const Segment& nx = segs[i + 1];
        const double next_val = nx.slope * s.t_end + nx.intercept;
        if (std::fabs(next_val - end_val) > 1e-6)
          throw ConfigError("charging function '" + name + "': discontinuity of " +
                            std::to_string(std::fabs(next_val - end_val)) + " kWh at t=" +
                            std::to_string(s.t_end));
      }
      if (s.t_end <= t_prev)
        throw ConfigError("charging function '" + name + "': segment ends must increase");
      pts.emplace_back(s.t_end, end_val);
      t_prev = s.t_end;
    }
    return ChargingFunction(std::move(name), std::move(pts));
  }

  const std::string& name() const { return name_; }
  double max_soc() const { return points_.back().second; }
  double full_time_min() const { return points_.back().first; }
  const std::vector<std::pair<double, double>>& breakpoints() const { return points_; }

  // SOC reached after `minutes` from empty; saturates at max_soc.
  double soc_after(double minutes) const {
    if (minutes < 0.0) throw std::domain_error("soc_after: negative time");
    if (minutes >= points_.back().first) return points_.back().second;
    std::size_t i = 1;
    while (points_[i].first < minutes) ++i;
    const auto& [t0, s0] = points_[i - 1];
    const auto& [t1, s1] = points_[i];
    return s0 + (s1 - s0) * (minutes - t0) / (t1 - t0);
  }

  // Minutes from empty to reach `soc`.
  double time_at(double soc) const {
    if (soc < 0.0 || soc > points_.back().second + 1e-12)
      throw std::domain_error("time_at: soc outside [0, max]");
    if (soc >= points_.back().second) return points_.back().first;
    std::size_t i = 1;
    while (points_[i].second < soc) ++i;
    const auto& [t0, s0] = points_[i - 1];
    const auto& [t1, s1] = points_[i];
    return t0 + (t1 - t0) * (soc - s0) / (s1 - s0);
  }

  // Minutes to charge from `from_kwh` to `to_kwh` (0 <= from <= to <= max).
  double time_for(double from_kwh, double to_kwh) const {
    if (from_kwh < 0.0 || to_kwh < from_kwh)
      throw std::domain_error("time_for: need 0 <= from <= to");
    if (to_kwh > points_.back().second + 1e-12)
      throw std::domain_error("time_for: target exceeds the curve maximum");
    return time_at(to_kwh) - time_at(from_kwh);
  }

  static const ChargingFunction& standard_30kwh() {
    static const ChargingFunction f("standard_30kwh",
                                    {{0.0, 0.0}, {139.5, 25.5}, {173.25, 28.5}, {227.25, 30.0}});
    return f;
  }

  static const ChargingFunction& fast_30kwh() {
    static const ChargingFunction f("fast_30kwh",
                                    {{0.0, 0.0}, {30.69, 25.5}, {38.115, 28.5}, {49.995, 30.0}});
    return f;
  }

  static const ChargingFunction& for_kind(ChargerKind kind) {
    return kind == ChargerKind::standard_30kwh ? standard_30kwh() : fast_30kwh();
  }

 private:
  std::string name_;
  std::vector<std::pair<double, double>> points_;
};

inline double recharge_soc(const ChargingFunction& f, double minutes) { return f.soc_after(minutes); }

inline double recharge_time(const ChargingFunction& f, double from_kwh, double to_kwh) {
  return f.time_for(from_kwh, to_kwh);
}

}  // namespace fleetmix::energy
