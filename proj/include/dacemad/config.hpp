#pragma once

// Simulation configuration. Defaults reproduce the reference deployment
// (10 UAVs over 3 km x 3 km at 120 m, 250 episodes of 1500 one-second steps).
// Values the reference deployment leaves open (attenuation, rotor tip speed,
// hover velocity, pack voltage, target sync period, exploration schedule,
// communication range) are ordinary fields with documented defaults.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dacemad {

inline constexpr int kConfigVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  friend bool operator==(const Point3&, const Point3&) = default;
};

struct Area {
  double x_min = 0.0;
  double x_max = 3000.0;
  double y_min = 0.0;
  double y_max = 3000.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  bool contains(Point2 p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
};

struct ChannelParams {
  // Free-space reference gain (lambda / 4 pi)^2 at a 2 GHz carrier.
  double attenuation = 1.4248291449703749e-4;
  double pathloss_exponent = 2.0;
  double tx_power_w = 0.1;        // 20 dBm
  double noise_w = 1e-16;         // -130 dBm
  double sinr_threshold = 3.1622776601683795;  // 5 dB
  double bandwidth_hz = 1e6;
  // UAVs farther than this from a vehicle do not interfere with it.
  double interference_range_m = std::numeric_limits<double>::infinity();

  void validate() const;
};

// Sign of the v^2 / (2 v0^2) term inside the induced-power root.
enum class PowerModelSign { plus, minus };

struct EnergyParams {
  double kappa0 = 79.85;   // J/s
  double kappa1 = 88.63;   // J/s
  double kappa2 = 0.018;   // kg/m
  double tip_speed = 120.0;
  double hover_velocity = 4.03;
  double battery_capacity_j = 16.0 * 22.2 * 3600.0;  // 16 Ah at 22.2 V
  PowerModelSign sign = PowerModelSign::plus;

  void validate() const;
};

struct LearningParams {
  double learning_rate = 1e-4;
  double discount = 0.95;
  std::size_t replay_capacity = 10000;
  std::size_t batch_size = 1024;
  std::size_t target_sync_period = 1000;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::size_t epsilon_decay_episodes = 200;
  double comm_range_m = 1000.0;
  std::size_t n_neighbors = 6;
  double rmsprop_decay = 0.99;
  double rmsprop_epsilon = 1e-8;
  std::vector<std::size_t> hidden_layers{128, 64};

  void validate() const;
};

enum class ScenarioKind { static_clusters, cross_roads, edge_concentration, trace };

std::string_view to_string(ScenarioKind kind);
std::string_view to_string(PowerModelSign sign);

struct Cluster {
  Point2 centre;
  double radius = 100.0;
  double weight = 1.0;
};

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::static_clusters;
  std::size_t n_vehicles = 100;
  std::vector<Cluster> clusters{{{750.0, 2250.0}, 150.0, 0.5},
                                {{2250.0, 2250.0}, 150.0, 0.3},
                                {{1500.0, 750.0}, 150.0, 0.2}};
  // cross_roads: two perpendicular strips through this point.
  std::optional<Point2> cross_centre;
  double strip_width = 60.0;
  // edge_concentration: users within this distance of x_max.
  double band_width = 200.0;
  std::filesystem::path trace_path;
};

struct WorldConfig {
  Area area;
  double uav_altitude = 120.0;
  std::size_t n_uavs = 10;
  double step_duration = 1.0;
  double uav_step_size = 20.0;
  std::size_t episodes = 250;
  std::size_t max_steps = 1500;
  std::uint64_t seed = 1;
  // Take-off positions; an evenly spaced grid over the area when empty.
  std::vector<Point2> initial_positions;

  ChannelParams channel;
  EnergyParams energy;
  LearningParams learning;
  ScenarioSpec scenario;

  std::size_t checkpoint_every = 1;
  // Write a trajectory file every N episodes (0: final episode only).
  std::size_t trajectory_every = 0;
  std::size_t eval_episodes = 1;

  void validate() const;
  std::vector<Point2> takeoff_positions() const;
  std::size_t observation_size() const { return 9 + 3 * learning.n_neighbors; }
};

// Parses a JSON config document. Missing keys keep their defaults; unknown
// keys and out-of-range values raise ConfigError naming the key path.
WorldConfig load_config_text(std::string_view text);
WorldConfig load_config(const std::filesystem::path& path);

// Canonical JSON form used for manifests and the config hash.
std::string dump_config(const WorldConfig& config);
std::uint64_t config_hash(const WorldConfig& config);

// Applies DACEMAD_SEED when set.
void apply_environment_overrides(WorldConfig& config);

}  // namespace dacemad
