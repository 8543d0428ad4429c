#include "dacemad/energy.hpp"

#include <cmath>

namespace dacemad::energy {

double propulsion_power(double speed, const EnergyParams& p) {
  if (!(speed >= 0.0)) throw DomainError("propulsion_power: speed must be >= 0");
  const double v2 = speed * speed;
  const double v0_2 = p.hover_velocity * p.hover_velocity;
  const double blade = p.kappa0 * (1.0 + 3.0 * v2 / (p.tip_speed * p.tip_speed));
  const double root = std::sqrt(1.0 + v2 * v2 / (4.0 * v0_2 * v0_2));
  const double signed_term = (p.sign == PowerModelSign::plus ? 1.0 : -1.0) * v2 / (2.0 * v0_2);
  const double induced = p.kappa1 * std::sqrt(root + signed_term);
  const double parasite = 0.5 * p.kappa2 * v2 * speed;
  return blade + induced + parasite;
}

double step_energy(double speed, double step_duration, const EnergyParams& params) {
  if (!(step_duration > 0.0)) throw DomainError("step_energy: step duration must be > 0");
  return step_duration * propulsion_power(speed, params);
}

BatteryState consume(BatteryState battery, double joules) {
  if (!(joules >= 0.0)) throw DomainError("consume: energy must be >= 0");
  battery.consumed_j += joules;
  battery.last_step_energy_j = joules;
  if (battery.consumed_j >= battery.capacity_j) battery.alive = false;
  return battery;
}

double total_system_ee(double total_bits, double total_energy_j) {
  if (!(total_energy_j > 0.0)) throw DomainError("total_system_ee: total energy must be > 0");
  return total_bits / total_energy_j;
}

}  // namespace dacemad::energy
