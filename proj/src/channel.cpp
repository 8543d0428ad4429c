#include "dacemad/channel.hpp"

#include <cmath>

namespace dacemad::channel {

double distance(Point2 vehicle, Point3 uav) {
  const double dx = uav.x - vehicle.x;
  const double dy = uav.y - vehicle.y;
  return std::sqrt(dx * dx + dy * dy + uav.z * uav.z);
}

double received_power(double distance_m, const ChannelParams& params) {
  if (!(distance_m > 0.0)) throw DomainError("received_power: distance must be > 0");
  return params.attenuation * params.tx_power_w * std::pow(distance_m, -params.pathloss_exponent);
}

double sinr(Point2 vehicle, Point3 serving, std::span<const Point3> interferers,
            const ChannelParams& params) {
  const double signal = received_power(distance(vehicle, serving), params);
  double interference = 0.0;
  for (const auto& z : interferers) {
    interference += received_power(distance(vehicle, z), params);
  }
  return signal / (interference + params.noise_w);
}

double rate(double sinr_linear, double bandwidth_hz) {
  if (sinr_linear < 0.0 || std::isnan(sinr_linear)) {
    throw DomainError("rate: SINR must be >= 0");
  }
  return bandwidth_hz * std::log2(1.0 + sinr_linear);
}

Association associate_and_score(std::span<const VehicleRef> vehicles,
                                std::span<const Point3> uavs, const ChannelParams& params) {
  if (uavs.empty()) throw std::invalid_argument("associate_and_score: no UAVs");

  Association out;
  out.scores.assign(uavs.size(), 0);
  out.rates_bps.assign(uavs.size(), 0.0);
  out.links.reserve(vehicles.size());

  std::vector<double> dist(uavs.size());
  std::vector<double> power(uavs.size());
  for (const auto& v : vehicles) {
    for (std::size_t j = 0; j < uavs.size(); ++j) {
      dist[j] = distance(v.position, uavs[j]);
      power[j] = received_power(dist[j], params);
    }

    LinkReport link;
    link.vehicle_id = std::string(v.id);
    double best = -1.0;
    for (std::size_t j = 0; j < uavs.size(); ++j) {
      double interference = 0.0;
      for (std::size_t z = 0; z < uavs.size(); ++z) {
        if (z != j && dist[z] <= params.interference_range_m) interference += power[z];
      }
      const double gamma = power[j] / (interference + params.noise_w);
      if (gamma > best) {
        best = gamma;
        link.serving_uav = j;
      }
    }
    link.sinr = best;
    link.connected = best > params.sinr_threshold;
    if (link.connected) {
      link.rate_bps = rate(best, params.bandwidth_hz);
      ++out.scores[*link.serving_uav];
      out.rates_bps[*link.serving_uav] += link.rate_bps;
    }
    out.links.push_back(std::move(link));
  }
  return out;
}

}  // namespace dacemad::channel
