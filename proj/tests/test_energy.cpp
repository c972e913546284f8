#include <catch2/catch_amalgamated.hpp>

#include "fleetmix/energy.hpp"

using namespace fleetmix;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

VehicleType make_van() {
  VehicleType v;
  v.name = "van";
  v.powertrain = Powertrain::ev;
  v.speed_kmh = 43.2;  // 12 m/s
  v.kerb_mass_kg = 1426.0;
  v.additional_mass_kg = 200.0;
  v.frontal_area_m2 = 4.06;
  v.drag_coefficient = 0.34;
  return v;
}

VehicleType make_icev() {
  VehicleType v = make_van();
  v.name = "icev";
  v.powertrain = Powertrain::icev;
  return v;
}

}  // namespace

TEST_CASE("mechanical power of the reference van") {
  // 1626 kg at 12 m/s, defaults: 0.001*(159.5106 + 119.674 + 0 + 16.26)*12.
  const energy::PowerContext ctx;
  REQUIRE_THAT(energy::mechanical_power_kw(make_van(), 0.0, ctx),
               WithinAbs(3.5453358489600006, 1e-12));
}

TEST_CASE("mechanical power is affine in load") {
  const energy::PowerContext ctx;
  const VehicleType van = make_van();
  const double p0 = energy::mechanical_power_kw(van, 0.0, ctx);
  const double p100 = energy::mechanical_power_kw(van, 100.0, ctx);
  const double p200 = energy::mechanical_power_kw(van, 200.0, ctx);
  REQUIRE_THAT(p200 - p100, WithinAbs(p100 - p0, 1e-12));
  // 100 cargo units at 0.05 kg/unit add 5 kg to the mass.
  const double p5kg = energy::mechanical_power_kw(van, 100 * 0.05, ctx);
  const double per_kg = (p100 - p0) / 100.0;
  REQUIRE_THAT(p5kg - p0, WithinAbs(5.0 * per_kg, 1e-12));
}

TEST_CASE("heating power at -10 C") {
  const energy::PowerContext ctx;
  // (0.3185*1.005*30 + 4*0.003*30) / 2.5
  REQUIRE_THAT(energy::climate_power_kw(ctx, -10.0), WithinAbs(3.985109999999999, 1e-12));
}

TEST_CASE("cooling power at 30 C") {
  const energy::PowerContext ctx;
  // ventilation 3.200925 + envelope 0.12 + solar 1.91808 + metabolic 0.10476, / 2.5
  REQUIRE_THAT(energy::climate_power_kw(ctx, 30.0), WithinAbs(2.1375051282578204, 1e-9));
}

TEST_CASE("climate power is zero at the setpoint and positive elsewhere") {
  const energy::PowerContext ctx;
  REQUIRE(energy::climate_power_kw(ctx, 20.0) == 0.0);
  for (double t : {-20.0, -5.0, 0.0, 10.0, 19.9, 20.1, 25.0, 35.0})
    REQUIRE(energy::climate_power_kw(ctx, t) > 0.0);
}

TEST_CASE("cooling with the sun below the horizon is a domain error") {
  energy::PowerContext ctx;
  ctx.zenith_angle_rad = energy::deg2rad(95.0);
  REQUIRE_THROWS_AS(energy::climate_power_kw(ctx, 30.0), std::domain_error);
  // Heating does not involve irradiance.
  REQUIRE_NOTHROW(energy::climate_power_kw(ctx, 0.0));
}

TEST_CASE("direct normal irradiance at defaults") {
  const energy::PowerContext ctx;
  REQUIRE_THAT(energy::direct_normal_irradiance(ctx), WithinAbs(0.8471159978736847, 1e-12));
}

TEST_CASE("EV power applies the discharge chain") {
  const energy::PowerContext ctx;
  // At the setpoint: P = P_M only; factor 1.184692 * 1.112434.
  REQUIRE_THAT(energy::vehicle_power_kw(make_van(), 0.0, 20.0, ctx),
               WithinAbs(4.672368548406275, 1e-9));
  REQUIRE_THAT(ctx.discharge_factor(), WithinAbs(1.317891660328, 1e-12));
  REQUIRE_THAT(ctx.recuperation_factor(), WithinAbs(0.785532455575, 1e-12));
}

TEST_CASE("EV recuperates downhill with the weaker chain") {
  energy::PowerContext ctx;
  ctx.road_gradient_rad = energy::deg2rad(-6.0);
  const VehicleType van = make_van();
  const double pm = energy::mechanical_power_kw(van, 0.0, ctx);
  REQUIRE(pm < 0.0);
  const double p = energy::vehicle_power_kw(van, 0.0, 20.0, ctx);
  REQUIRE_THAT(p, WithinAbs(ctx.recuperation_factor() * pm, 1e-12));
  REQUIRE(p < 0.0);
  REQUIRE(p > pm * ctx.discharge_factor());  // recuperation recovers less than discharge costs
}

TEST_CASE("ICEV power has an idle floor and never goes negative") {
  const energy::PowerContext ctx;
  VehicleType icev = make_icev();
  // Friction floor 0.2 * 33 * 1.6 = 10.56 kW at standstill.
  icev.speed_kmh = 0.0;
  REQUIRE_THAT(energy::vehicle_power_kw(icev, 0.0, 20.0, ctx), WithinAbs(10.56, 1e-12));
  // Steep downhill cannot push fuel burn below zero.
  energy::PowerContext down;
  down.road_gradient_rad = energy::deg2rad(-20.0);
  icev.speed_kmh = 43.2;
  REQUIRE(energy::mechanical_power_kw(icev, 0.0, down) < 0.0);
  REQUIRE(energy::vehicle_power_kw(icev, 0.0, 20.0, down) == 0.0);
}

TEST_CASE("ICEV power ignores climate and auxiliary loads") {
  const energy::PowerContext ctx;
  VehicleType icev = make_icev();
  icev.auxiliary_power_kw = 5.0;
  const double cold = energy::vehicle_power_kw(icev, 0.0, -10.0, ctx);
  const double warm = energy::vehicle_power_kw(icev, 0.0, 20.0, ctx);
  REQUIRE(cold == warm);
}

TEST_CASE("EV power includes the auxiliary draw") {
  const energy::PowerContext ctx;
  VehicleType bike = make_van();
  bike.auxiliary_power_kw = 0.1;
  const double p0 = energy::vehicle_power_kw(make_van(), 0.0, 20.0, ctx);
  const double p1 = energy::vehicle_power_kw(bike, 0.0, 20.0, ctx);
  REQUIRE_THAT(p1 - p0, WithinAbs(0.1 * ctx.discharge_factor(), 1e-12));
}

TEST_CASE("arc energy is power times hours") {
  const energy::PowerContext ctx;
  const VehicleType van = make_van();
  const double p = energy::vehicle_power_kw(van, 10.0, -5.0, ctx);
  REQUIRE_THAT(energy::arc_energy_kwh(van, 10.0, -5.0, 0.5, ctx), WithinAbs(0.5 * p, 1e-12));
  REQUIRE(energy::arc_energy_kwh(van, 10.0, -5.0, 0.0, ctx) == 0.0);
}

TEST_CASE("climate share of total EV power at -10 C") {
  const energy::PowerContext ctx;
  const double pt = energy::climate_power_kw(ctx, -10.0);
  const double pm = energy::mechanical_power_kw(make_van(), 0.0, ctx);
  REQUIRE_THAT(pt / (pt + pm), WithinAbs(0.529199741944943, 1e-9));
}
