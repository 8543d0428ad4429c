#pragma once

namespace dacemad::units {

double db_to_linear(double db);
double linear_to_db(double linear);
double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

constexpr double kmh_to_ms(double kmh) { return kmh / 3.6; }

}  // namespace dacemad::units
