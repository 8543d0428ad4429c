#pragma once

// Multi-UAV world. One call to step() moves every live UAV, advances the
// vehicle snapshot, re-associates users, charges propulsion energy,
// exchanges neighbour state, computes rewards and rebuilds observations.
//
// Observation layout (length 9 + 3K, K = learning.n_neighbors):
//   0 x   1 y   2 h   3 C   4 e   5 C/C*   6 x*   7 y*   8 C_o/C_o*
//   9 + 3k + {0,1,2}: distance, score, step energy of the k-th nearest
//   neighbour (padded with 1, 0, 0).
// Positions are scaled by the area extent, altitude by the flight altitude,
// scores by the number of deployed vehicles, energies by the largest
// per-step energy and distances by the area diagonal.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dacemad/channel.hpp"
#include "dacemad/config.hpp"
#include "dacemad/energy.hpp"
#include "dacemad/mobility.hpp"

namespace dacemad::env {

enum class Action : std::uint8_t { plus_x = 0, minus_x = 1, plus_y = 2, minus_y = 3, hover = 4 };
inline constexpr std::size_t kNumActions = 5;

Action action_from_index(std::size_t index);
inline std::size_t index_of(Action a) { return static_cast<std::size_t>(a); }

namespace obs {
inline constexpr std::size_t kX = 0;
inline constexpr std::size_t kY = 1;
inline constexpr std::size_t kH = 2;
inline constexpr std::size_t kScore = 3;
inline constexpr std::size_t kEnergy = 4;
inline constexpr std::size_t kScoreRatio = 5;
inline constexpr std::size_t kBestX = 6;
inline constexpr std::size_t kBestY = 7;
inline constexpr std::size_t kHoodRatio = 8;
inline constexpr std::size_t kFirstNeighbour = 9;
}  // namespace obs

using Observation = std::vector<double>;

class StepError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct NeighborReport {
  std::size_t uav = 0;
  double distance = 0.0;
  std::size_t score = 0;
  double step_energy = 0.0;
};

// Best-experienced connectivity, kept across episodes of a run.
struct DensityMemory {
  std::size_t best_score = 0;
  Point2 best_position;
  std::size_t best_neighbourhood_score = 0;
  friend bool operator==(const DensityMemory&, const DensityMemory&) = default;
};

struct UavState {
  Point3 position;
  std::size_t score = 0;
  std::size_t prev_score = 0;
  std::size_t neighbourhood_score = 0;
  std::size_t prev_neighbourhood_score = 0;
  double step_energy = 0.0;
  double prev_step_energy = 0.0;
  double rate_bps = 0.0;
  energy::BatteryState battery;
  DensityMemory memory;
  std::vector<NeighborReport> neighbours;
};

struct EnvOptions {
  // Neighbour exchange; off for agents without direct collaboration.
  bool share_state = true;
  // Include the cooperative factor in the reward.
  bool cooperative_reward = true;
  // Keep per-vehicle positions and serving UAV in the step log.
  bool record_vehicles = false;
};

struct UavStepRecord {
  double x = 0.0;
  double y = 0.0;
  double speed = 0.0;
  std::size_t score = 0;
  double energy_j = 0.0;
  double rate_bps = 0.0;
  double bits = 0.0;
  double reward = 0.0;
  bool active = false;  // took part in this step
};

struct VehicleRecord {
  std::string id;
  double x = 0.0;
  double y = 0.0;
  int serving = -1;  // UAV index when connected
};

struct StepLog {
  std::size_t t = 0;
  double step_duration = 1.0;
  std::size_t deployed = 0;
  std::size_t messages = 0;
  std::vector<UavStepRecord> uavs;
  std::vector<VehicleRecord> vehicles;
};

struct StepOutput {
  // Indexed by UAV; empty for UAVs that did not act this step.
  std::vector<Observation> observations;
  std::vector<double> rewards;
  std::vector<bool> done;
  // Battery depletion (true terminal), as opposed to truncation.
  std::vector<bool> terminal;
  StepLog log;
};

struct RewardInputs {
  std::size_t score = 0;
  std::size_t prev_score = 0;
  std::size_t best_score = 0;
  double step_energy = 0.0;
  double prev_step_energy = 0.0;
  std::size_t hood_score = 0;
  std::size_t prev_hood_score = 0;
  std::size_t best_hood_score = 0;
  bool cooperative = true;
};

// (e_prev - e) / (e + e_prev), zero when both are zero.
double energy_term(double prev_step_energy, double step_energy);

// +C_o/C_o* on a neighbourhood increase, -C_o/C_o* otherwise, 0 if C_o* = 0.
double cooperative_factor(std::size_t hood_score, std::size_t prev_hood_score,
                          std::size_t best_hood_score);

double reward(const RewardInputs& in);

// num / den, or 0 when den is 0.
double safe_ratio(double num, double den);

// Total report messages per step: each UAV receives one report from every
// other live UAV within range.
std::size_t message_count(std::span<const UavState> uavs, const std::vector<bool>& active,
                          double comm_range, bool share_state);

class Environment {
 public:
  Environment(WorldConfig config, mobility::VehicleStream vehicles, EnvOptions options = {});

  // Starts a new episode at the take-off positions with full batteries.
  // Density memory persists unless clear_memory() is called.
  StepOutput reset();
  StepOutput step(std::span<const std::optional<Action>> actions);

  Observation observe(std::size_t uav) const;

  void clear_memory();
  const DensityMemory& memory(std::size_t uav) const { return uavs_.at(uav).memory; }
  void set_memory(std::size_t uav, const DensityMemory& memory) { uavs_.at(uav).memory = memory; }

  std::size_t n_uavs() const { return uavs_.size(); }
  std::size_t timestep() const { return t_; }
  bool terminated() const { return terminated_; }
  bool alive(std::size_t uav) const { return uavs_.at(uav).battery.alive; }
  const UavState& uav(std::size_t j) const { return uavs_.at(j); }
  std::span<const UavState> uavs() const { return uavs_; }
  const WorldConfig& config() const { return config_; }
  const EnvOptions& options() const { return options_; }
  void set_record_vehicles(bool on) { options_.record_vehicles = on; }
  std::size_t observation_size() const { return config_.observation_size(); }
  double max_step_energy() const { return max_step_energy_; }
  std::size_t deployed() const;

 private:
  void associate(std::vector<channel::LinkReport>* links);
  void exchange_neighbours(const std::vector<bool>& active);
  void update_memory(std::size_t j);
  bool episode_over() const;
  StepOutput make_output(const std::vector<bool>& active) const;

  WorldConfig config_;
  mobility::VehicleStream vehicles_;
  EnvOptions options_;
  std::vector<Point2> takeoff_;
  std::vector<UavState> uavs_;
  std::size_t t_ = 0;
  bool terminated_ = true;
  double max_step_energy_ = 0.0;
  double hover_step_energy_ = 0.0;
  double diagonal_ = 0.0;
};

}  // namespace dacemad::env
