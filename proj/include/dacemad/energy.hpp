#pragma once

#include <span>
#include <stdexcept>

#include "dacemad/config.hpp"

namespace dacemad::energy {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Rotary-wing propulsion power in watts at forward speed `speed` (m/s).
///
/// kappa0 (1 + 3V^2/U_tip^2) + kappa1 (sqrt(1 + V^4/(4 v0^4)) +- V^2/(2 v0^2))^(1/2)
///   + (kappa2 / 2) V^3
///
/// The sign inside the induced-power term follows `params.sign`; both
/// choices agree at V = 0 where the power is kappa0 + kappa1.
double propulsion_power(double speed, const EnergyParams& params);

double step_energy(double speed, double step_duration, const EnergyParams& params);

struct BatteryState {
  double capacity_j = 0.0;
  double consumed_j = 0.0;
  double last_step_energy_j = 0.0;
  bool alive = true;

  static BatteryState full(double capacity_j) { return {capacity_j, 0.0, 0.0, true}; }
  double remaining_j() const { return capacity_j - consumed_j; }
};

// Returns the battery after drawing `joules`; a battery that reaches its
// capacity is dead and stays dead.
BatteryState consume(BatteryState battery, double joules);

// Total system EE in bits per joule: delivered bits over consumed joules,
// both already summed over UAVs and time-steps.
double total_system_ee(double total_bits, double total_energy_j);

}  // namespace dacemad::energy
