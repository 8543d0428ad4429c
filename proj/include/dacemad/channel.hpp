#pragma once

// Downlink SINR under co-channel interference, Shannon rate and
// strongest-SINR association. Vehicles sit at ground height; distances are
// 3D so the UAV altitude always contributes.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dacemad/config.hpp"

namespace dacemad::channel {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct LinkReport {
  std::string vehicle_id;
  std::optional<std::size_t> serving_uav;
  double sinr = 0.0;
  double rate_bps = 0.0;
  bool connected = false;
};

struct Association {
  std::vector<LinkReport> links;
  std::vector<std::size_t> scores;  // C_j per UAV
  std::vector<double> rates_bps;    // summed rate of connected links per UAV
};

double distance(Point2 vehicle, Point3 uav);

// Received power beta * P * d^-alpha.
double received_power(double distance_m, const ChannelParams& params);

double sinr(Point2 vehicle, Point3 serving, std::span<const Point3> interferers,
            const ChannelParams& params);

double rate(double sinr_linear, double bandwidth_hz);

struct VehicleRef {
  std::string_view id;
  Point2 position;
};

// Every UAV is evaluated as a candidate server with all other UAVs (within
// the interference range) as interferers. Ties on SINR go to the lowest
// UAV index.
Association associate_and_score(std::span<const VehicleRef> vehicles,
                                 std::span<const Point3> uavs, const ChannelParams& params);

}  // namespace dacemad::channel
