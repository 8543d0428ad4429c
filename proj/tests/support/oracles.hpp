#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. They are written directly from the formulas, without calling into
// the library code they check.

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace oracle {

struct Pt2 {
  double x, y;
};
struct Pt3 {
  double x, y, z;
};

struct ChannelConsts {
  double beta = 1.4248291449703749e-4;
  double alpha = 2.0;
  double power = 0.1;
  double noise = 1e-16;
  double threshold = 3.1622776601683795;
  double bandwidth = 1e6;
};

struct Link {
  std::optional<std::size_t> uav;
  double sinr = 0.0;
  bool connected = false;
};

// Enumerates every (vehicle, UAV) pair and its SINR with every other UAV as
// an interferer.
inline std::vector<Link> brute_force_association(const std::vector<Pt2>& vehicles,
                                                 const std::vector<Pt3>& uavs,
                                                 const ChannelConsts& c,
                                                 std::vector<std::size_t>* scores) {
  std::vector<Link> links;
  scores->assign(uavs.size(), 0);
  for (const auto& v : vehicles) {
    Link best;
    best.sinr = -1.0;
    for (std::size_t j = 0; j < uavs.size(); ++j) {
      auto rx = [&](const Pt3& u) {
        const double d = std::hypot(u.x - v.x, u.y - v.y, u.z);
        return c.beta * c.power / std::pow(d, c.alpha);
      };
      double interference = 0.0;
      for (std::size_t z = 0; z < uavs.size(); ++z) {
        if (z != j) interference += rx(uavs[z]);
      }
      const double g = rx(uavs[j]) / (interference + c.noise);
      if (g > best.sinr) {
        best.sinr = g;
        best.uav = j;
      }
    }
    best.connected = best.sinr > c.threshold;
    if (best.connected) ++(*scores)[*best.uav];
    links.push_back(best);
  }
  return links;
}

// Rewards for one agent step.
inline double reward(double c, double c_prev, double c_best, double e, double e_prev,
                     double co, double co_prev, double co_best, bool cooperative) {
  double omega = 0.0;
  if (e + e_prev != 0.0) omega = (e_prev - e) / (e + e_prev);
  double coop = 0.0;
  if (cooperative && co_best != 0.0) coop = co > co_prev ? co / co_best : -co / co_best;
  const double ratio = c_best != 0.0 ? c / c_best : 0.0;
  if (c > c_prev) return coop + omega + ratio;
  if (c == c_prev) return coop + omega;
  return coop + omega - ratio;
}

inline double propulsion(double v, bool plus_sign) {
  const double k0 = 79.85, k1 = 88.63, k2 = 0.018, u = 120.0, v0 = 4.03;
  const double s = plus_sign ? 1.0 : -1.0;
  return k0 * (1 + 3 * v * v / (u * u)) +
         k1 * std::sqrt(std::sqrt(1 + std::pow(v, 4) / (4 * std::pow(v0, 4))) +
                        s * v * v / (2 * v0 * v0)) +
         k2 / 2 * v * v * v;
}

}  // namespace oracle
