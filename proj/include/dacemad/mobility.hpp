#pragma once

// Ground-user positions per time-step, either from a synthetic density
// scenario (static users) or from a floating-car-data trace.
//
// Trace CSV format (UTF-8, one row per vehicle per time-step):
//
//   t,vehicle_id,x,y,speed
//   0,veh12,1032.5,887.0,8.3
//
// t is an integer time-step (1 trace second = 1 step), x/y are metres in the
// simulation frame and speed is m/s. Rows must be ordered by non-decreasing
// t. A vehicle missing at some t is outside the region at that step.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dacemad/config.hpp"

namespace dacemad::mobility {

inline constexpr std::string_view kTraceHeader = "t,vehicle_id,x,y,speed";
// 50 km/h.
inline constexpr double kMaxTraceSpeed = 50.0 / 3.6;

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VehicleEntry {
  std::string id;
  double x = 0.0;
  double y = 0.0;
  double speed = 0.0;

  Point2 position() const { return {x, y}; }
  friend bool operator==(const VehicleEntry&, const VehicleEntry&) = default;
};

struct VehicleSnapshot {
  std::size_t timestep = 0;
  std::vector<VehicleEntry> entries;
  friend bool operator==(const VehicleSnapshot&, const VehicleSnapshot&) = default;
};

// Random-access snapshot provider. Static scenarios repeat one snapshot
// forever; traces have a finite length and the episode ends with them.
class VehicleStream {
 public:
  static VehicleStream repeating(std::vector<VehicleEntry> entries);
  static VehicleStream finite(std::vector<VehicleSnapshot> snapshots);

  // nullopt for unbounded streams.
  std::optional<std::size_t> length() const;
  bool has(std::size_t t) const;
  std::span<const VehicleEntry> entries(std::size_t t) const;
  VehicleSnapshot snapshot(std::size_t t) const;

 private:
  bool repeating_ = true;
  std::vector<VehicleSnapshot> snapshots_;
};

struct TraceData {
  VehicleStream stream;
  std::size_t rejected_rows = 0;  // out of area or out of speed range
};

TraceData parse_trace(std::istream& in, const Area& area);
TraceData load_trace(const std::filesystem::path& path, const Area& area);

void write_trace(std::ostream& out, const VehicleStream& stream, std::size_t steps);

VehicleStream generate_scenario(const ScenarioSpec& spec, const Area& area, std::uint64_t seed);

}  // namespace dacemad::mobility
