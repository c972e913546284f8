// Prints the per-kilometer energy use of a delivery van across ambient
// temperatures, illustrating the U-shaped climate penalty around the cabin
// setpoint.

#include <cstdio>

#include "fleetmix/energy.hpp"

int main() {
  using namespace fleetmix;
  VehicleType van;
  van.name = "van";
  van.powertrain = Powertrain::ev;
  van.speed_kmh = 43.2;
  van.kerb_mass_kg = 1426.0;
  van.additional_mass_kg = 200.0;
  energy::PowerContext ctx;

  std::printf("%8s %12s %12s %12s\n", "T [C]", "P_M [kW]", "P_T [kW]", "kWh/km");
  for (double t = -20.0; t <= 40.0; t += 5.0) {
    const double pm = energy::mechanical_power_kw(van, 0.0, ctx);
    const double pt = energy::climate_power_kw(ctx, t);
    const double p = energy::vehicle_power_kw(van, 0.0, t, ctx);
    std::printf("%8.1f %12.4f %12.4f %12.4f\n", t, pm, pt, p / van.speed_kmh);
  }
  return 0;
}
