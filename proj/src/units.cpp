#include "dacemad/units.hpp"

#include <cmath>

namespace dacemad::units {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

double dbm_to_watts(double dbm) { return db_to_linear(dbm) / 1000.0; }

double watts_to_dbm(double watts) { return linear_to_db(watts * 1000.0); }

}  // namespace dacemad::units
