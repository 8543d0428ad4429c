#include <cmath>

#include "dacemad/energy.hpp"
#include "doctest.h"

using namespace dacemad;

namespace {

// Direct transcription of the rotary-wing model.
double oracle_power(double v, double sign) {
  const double k0 = 79.85, k1 = 88.63, k2 = 0.018, u = 120.0, v0 = 4.03;
  return k0 * (1 + 3 * v * v / (u * u)) +
         k1 * std::sqrt(std::sqrt(1 + std::pow(v, 4) / (4 * std::pow(v0, 4))) +
                        sign * v * v / (2 * v0 * v0)) +
         k2 / 2 * v * v * v;
}

}  // namespace

TEST_CASE("hover power is kappa0 + kappa1") {
  EnergyParams p;
  CHECK(energy::propulsion_power(0.0, p) == doctest::Approx(168.48).epsilon(1e-12));
  p.sign = PowerModelSign::minus;
  CHECK(energy::propulsion_power(0.0, p) == doctest::Approx(168.48).epsilon(1e-12));
}

TEST_CASE("power against the oracle") {
  EnergyParams p;
  CHECK(energy::propulsion_power(10.0, p) == doctest::Approx(313.24888793859964).epsilon(1e-12));
  CHECK(energy::propulsion_power(20.0, p) == doctest::Approx(598.7170954297096).epsilon(1e-12));
  p.sign = PowerModelSign::minus;
  CHECK(energy::propulsion_power(10.0, p) == doctest::Approx(125.78085344038786).epsilon(1e-12));
  CHECK(energy::propulsion_power(20.0, p) == doctest::Approx(176.34843335386464).epsilon(1e-12));
  for (double v = 0.0; v <= 30.0; v += 0.37) {
    EnergyParams a;
    CHECK(energy::propulsion_power(v, a) == doctest::Approx(oracle_power(v, 1.0)).epsilon(1e-12));
    a.sign = PowerModelSign::minus;
    CHECK(energy::propulsion_power(v, a) == doctest::Approx(oracle_power(v, -1.0)).epsilon(1e-12));
  }
}

TEST_CASE("power is positive and the additive form increases with speed") {
  EnergyParams p;
  double prev = energy::propulsion_power(0.0, p);
  for (double v = 0.5; v <= 40.0; v += 0.5) {
    const double now = energy::propulsion_power(v, p);
    CHECK(now > 0.0);
    CHECK(now > prev);
    prev = now;
  }
}

TEST_CASE("domain errors") {
  EnergyParams p;
  CHECK_THROWS_AS(energy::propulsion_power(-1.0, p), energy::DomainError);
  CHECK_THROWS_AS(energy::step_energy(1.0, 0.0, p), energy::DomainError);
  CHECK_THROWS_AS(energy::consume(energy::BatteryState::full(10.0), -1.0), energy::DomainError);
  CHECK_THROWS_AS(energy::total_system_ee(1.0, 0.0), energy::DomainError);
}

TEST_CASE("battery accounting") {
  EnergyParams p;
  CHECK(p.battery_capacity_j == doctest::Approx(1278720.0));
  auto b = energy::BatteryState::full(p.battery_capacity_j);
  const double hover = energy::step_energy(0.0, 1.0, p);
  for (int i = 0; i < 1500; ++i) b = energy::consume(b, hover);
  CHECK(b.consumed_j == doctest::Approx(252720.0).epsilon(1e-12));
  CHECK(b.alive);
  CHECK(b.remaining_j() == doctest::Approx(1278720.0 - 252720.0));

  auto small = energy::BatteryState::full(500.0);
  small = energy::consume(small, 300.0);
  CHECK(small.alive);
  small = energy::consume(small, 200.0);
  CHECK_FALSE(small.alive);
  CHECK(small.last_step_energy_j == 200.0);
}

TEST_CASE("step energy") {
  EnergyParams p;
  CHECK(energy::step_energy(0.0, 1.0, p) == doctest::Approx(168.48).epsilon(1e-12));
  CHECK(energy::step_energy(0.0, 2.0, p) == doctest::Approx(336.96).epsilon(1e-12));
  CHECK(energy::step_energy(10.0, 1.0, p) == energy::propulsion_power(10.0, p));
  // kappa2 term alone at 20 m/s
  EnergyParams only_drag = p;
  only_drag.kappa0 = 1e-300;
  only_drag.kappa1 = 1e-300;
  CHECK(energy::propulsion_power(20.0, only_drag) == doctest::Approx(72.0).epsilon(1e-12));
}

TEST_CASE("system energy efficiency") {
  // one UAV at 1 Mb/s for 10 hover steps
  CHECK(energy::total_system_ee(1e7, 10 * 168.48) ==
        doctest::Approx(5935.422602089269).epsilon(1e-12));
  CHECK(energy::total_system_ee(0.0, 5.0) == 0.0);
  CHECK(energy::total_system_ee(2e7, 10 * 168.48) ==
        doctest::Approx(2 * 5935.422602089269).epsilon(1e-12));
}
