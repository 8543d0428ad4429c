#include "dacemad/environment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dacemad::env {

Action action_from_index(std::size_t index) {
  if (index >= kNumActions) throw std::out_of_range("action index " + std::to_string(index));
  return static_cast<Action>(index);
}

double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double energy_term(double prev_step_energy, double step_energy) {
  const double sum = step_energy + prev_step_energy;
  if (sum == 0.0) return 0.0;
  return (prev_step_energy - step_energy) / sum;
}

double cooperative_factor(std::size_t hood_score, std::size_t prev_hood_score,
                          std::size_t best_hood_score) {
  const double ratio =
      safe_ratio(static_cast<double>(hood_score), static_cast<double>(best_hood_score));
  return hood_score > prev_hood_score ? ratio : -ratio;
}

double reward(const RewardInputs& in) {
  const double omega_coop =
      in.cooperative ? cooperative_factor(in.hood_score, in.prev_hood_score, in.best_hood_score)
                     : 0.0;
  const double omega = energy_term(in.prev_step_energy, in.step_energy);
  const double ratio =
      safe_ratio(static_cast<double>(in.score), static_cast<double>(in.best_score));
  if (in.score > in.prev_score) return omega_coop + omega + ratio;
  if (in.score == in.prev_score) return omega_coop + omega;
  return omega_coop + omega - ratio;
}

namespace {

double uav_distance(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

std::size_t message_count(std::span<const UavState> uavs, const std::vector<bool>& active,
                          double comm_range, bool share_state) {
  if (!share_state) return 0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < uavs.size(); ++j) {
    if (!active[j]) continue;
    for (std::size_t z = 0; z < uavs.size(); ++z) {
      if (z != j && active[z] && uav_distance(uavs[j].position, uavs[z].position) <= comm_range) {
        ++count;
      }
    }
  }
  return count;
}

Environment::Environment(WorldConfig config, mobility::VehicleStream vehicles, EnvOptions options)
    : config_(std::move(config)), vehicles_(std::move(vehicles)), options_(options) {
  config_.validate();
  takeoff_ = config_.takeoff_positions();
  uavs_.resize(config_.n_uavs);
  hover_step_energy_ = energy::step_energy(0.0, config_.step_duration, config_.energy);
  max_step_energy_ = std::max(
      hover_step_energy_,
      energy::step_energy(config_.uav_step_size / config_.step_duration, config_.step_duration,
                          config_.energy));
  diagonal_ = std::hypot(config_.area.width(), config_.area.height());
  clear_memory();
}

void Environment::clear_memory() {
  for (std::size_t j = 0; j < uavs_.size(); ++j) uavs_[j].memory = {0, takeoff_[j], 0};
}

std::size_t Environment::deployed() const {
  return vehicles_.has(t_) ? vehicles_.entries(t_).size() : 0;
}

void Environment::associate(std::vector<channel::LinkReport>* links) {
  std::vector<Point3> positions;
  std::vector<std::size_t> index;
  for (std::size_t j = 0; j < uavs_.size(); ++j) {
    uavs_[j].score = 0;
    uavs_[j].rate_bps = 0.0;
    if (uavs_[j].battery.alive) {
      positions.push_back(uavs_[j].position);
      index.push_back(j);
    }
  }
  if (positions.empty()) return;

  const auto entries = vehicles_.entries(t_);
  std::vector<channel::VehicleRef> refs;
  refs.reserve(entries.size());
  for (const auto& e : entries) refs.push_back({e.id, e.position()});

  auto result = channel::associate_and_score(refs, positions, config_.channel);
  for (std::size_t k = 0; k < index.size(); ++k) {
    uavs_[index[k]].score = result.scores[k];
    uavs_[index[k]].rate_bps = result.rates_bps[k];
  }
  if (links != nullptr) {
    for (auto& link : result.links) {
      if (link.serving_uav) link.serving_uav = index[*link.serving_uav];
    }
    *links = std::move(result.links);
  }
}

void Environment::exchange_neighbours(const std::vector<bool>& active) {
  const auto k_max = config_.learning.n_neighbors;
  for (std::size_t j = 0; j < uavs_.size(); ++j) {
    auto& self = uavs_[j];
    self.neighbours.clear();
    self.neighbourhood_score = self.score;
    if (!active[j] || !options_.share_state) continue;
    for (std::size_t z = 0; z < uavs_.size(); ++z) {
      if (z == j || !active[z]) continue;
      const double d = uav_distance(self.position, uavs_[z].position);
      if (d <= config_.learning.comm_range_m) {
        self.neighbours.push_back({z, d, uavs_[z].score, uavs_[z].step_energy});
        self.neighbourhood_score += uavs_[z].score;
      }
    }
    std::stable_sort(self.neighbours.begin(), self.neighbours.end(),
                     [](const auto& a, const auto& b) { return a.distance < b.distance; });
    if (self.neighbours.size() > k_max) self.neighbours.resize(k_max);
  }
}

void Environment::update_memory(std::size_t j) {
  auto& u = uavs_[j];
  if (u.score > u.memory.best_score) {
    u.memory.best_score = u.score;
    u.memory.best_position = {u.position.x, u.position.y};
  }
  if (u.neighbourhood_score > u.memory.best_neighbourhood_score) {
    u.memory.best_neighbourhood_score = u.neighbourhood_score;
  }
}

bool Environment::episode_over() const {
  if (t_ >= config_.max_steps || !vehicles_.has(t_ + 1)) return true;
  return std::none_of(uavs_.begin(), uavs_.end(), [](const auto& u) { return u.battery.alive; });
}

Observation Environment::observe(std::size_t j) const {
  const auto& u = uavs_.at(j);
  const auto& area = config_.area;
  const double deployed_count = static_cast<double>(deployed());
  Observation o(observation_size(), 0.0);
  o[obs::kX] = clamp01((u.position.x - area.x_min) / area.width());
  o[obs::kY] = clamp01((u.position.y - area.y_min) / area.height());
  o[obs::kH] = clamp01(u.position.z / config_.uav_altitude);
  o[obs::kScore] = clamp01(safe_ratio(static_cast<double>(u.score), deployed_count));
  o[obs::kEnergy] = clamp01(u.step_energy / max_step_energy_);
  o[obs::kScoreRatio] = clamp01(
      safe_ratio(static_cast<double>(u.score), static_cast<double>(u.memory.best_score)));
  o[obs::kBestX] = clamp01((u.memory.best_position.x - area.x_min) / area.width());
  o[obs::kBestY] = clamp01((u.memory.best_position.y - area.y_min) / area.height());
  o[obs::kHoodRatio] = clamp01(safe_ratio(static_cast<double>(u.neighbourhood_score),
                                          static_cast<double>(u.memory.best_neighbourhood_score)));
  for (std::size_t k = 0; k < config_.learning.n_neighbors; ++k) {
    const auto base = obs::kFirstNeighbour + 3 * k;
    if (k < u.neighbours.size()) {
      const auto& n = u.neighbours[k];
      o[base] = clamp01(n.distance / diagonal_);
      o[base + 1] = clamp01(safe_ratio(static_cast<double>(n.score), deployed_count));
      o[base + 2] = clamp01(n.step_energy / max_step_energy_);
    } else {
      o[base] = 1.0;
    }
  }
  return o;
}

StepOutput Environment::make_output(const std::vector<bool>& active) const {
  StepOutput out;
  const auto n = uavs_.size();
  out.observations.resize(n);
  out.rewards.assign(n, 0.0);
  out.done.assign(n, false);
  out.terminal.assign(n, false);
  for (std::size_t j = 0; j < n; ++j) {
    if (active[j]) out.observations[j] = observe(j);
  }
  return out;
}

StepOutput Environment::reset() {
  t_ = 0;
  for (std::size_t j = 0; j < uavs_.size(); ++j) {
    auto& u = uavs_[j];
    u.position = {takeoff_[j].x, takeoff_[j].y, config_.uav_altitude};
    u.battery = energy::BatteryState::full(config_.energy.battery_capacity_j);
    u.step_energy = hover_step_energy_;
    u.prev_step_energy = hover_step_energy_;
    u.neighbours.clear();
    u.score = u.prev_score = 0;
    u.neighbourhood_score = u.prev_neighbourhood_score = 0;
    u.rate_bps = 0.0;
  }
  const std::vector<bool> active(uavs_.size(), true);

  terminated_ = !vehicles_.has(0);
  if (terminated_) {
    auto out = make_output(active);
    out.done.assign(uavs_.size(), true);
    return out;
  }
  associate(nullptr);
  exchange_neighbours(active);
  for (std::size_t j = 0; j < uavs_.size(); ++j) {
    auto& u = uavs_[j];
    u.prev_score = u.score;
    u.prev_neighbourhood_score = u.neighbourhood_score;
    update_memory(j);
  }
  return make_output(active);
}

StepOutput Environment::step(std::span<const std::optional<Action>> actions) {
  if (terminated_) throw StepError("step: episode already terminated");
  const auto n = uavs_.size();
  if (actions.size() != n) throw StepError("step: expected one action slot per UAV");

  std::vector<bool> active(n);
  for (std::size_t j = 0; j < n; ++j) {
    active[j] = uavs_[j].battery.alive;
    if (!active[j] && actions[j]) {
      throw StepError("step: action given for dead UAV " + std::to_string(j));
    }
    if (active[j] && !actions[j]) {
      throw StepError("step: missing action for UAV " + std::to_string(j));
    }
  }

  // (1) moves; a move leaving the area is rejected and the UAV hovers.
  std::vector<double> speeds(n, 0.0);
  const double s = config_.uav_step_size;
  for (std::size_t j = 0; j < n; ++j) {
    if (!active[j]) continue;
    auto& pos = uavs_[j].position;
    Point2 target{pos.x, pos.y};
    switch (*actions[j]) {
      case Action::plus_x: target.x += s; break;
      case Action::minus_x: target.x -= s; break;
      case Action::plus_y: target.y += s; break;
      case Action::minus_y: target.y -= s; break;
      case Action::hover: break;
    }
    if (config_.area.contains(target)) {
      speeds[j] = std::hypot(target.x - pos.x, target.y - pos.y) / config_.step_duration;
      pos.x = target.x;
      pos.y = target.y;
    }
  }

  // (2) next vehicle snapshot, (3) association.
  ++t_;
  for (auto& u : uavs_) {
    u.prev_score = u.score;
    u.prev_neighbourhood_score = u.neighbourhood_score;
  }
  std::vector<channel::LinkReport> links;
  associate(options_.record_vehicles ? &links : nullptr);

  // (4) propulsion energy.
  for (std::size_t j = 0; j < n; ++j) {
    if (!active[j]) continue;
    auto& u = uavs_[j];
    const double e = energy::step_energy(speeds[j], config_.step_duration, config_.energy);
    u.battery = energy::consume(u.battery, e);
    u.prev_step_energy = u.step_energy;
    u.step_energy = e;
  }

  // (5) neighbour exchange.
  const auto messages =
      message_count(uavs_, active, config_.learning.comm_range_m, options_.share_state);
  exchange_neighbours(active);

  // (6) rewards against the maxima held before this step, (7) maxima update.
  std::vector<double> rewards(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (!active[j]) continue;
    const auto& u = uavs_[j];
    rewards[j] = reward({u.score, u.prev_score, u.memory.best_score, u.step_energy,
                         u.prev_step_energy, u.neighbourhood_score, u.prev_neighbourhood_score,
                         u.memory.best_neighbourhood_score, options_.cooperative_reward});
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (active[j]) update_memory(j);
  }

  // (8) observations, termination and log.
  const bool over = episode_over();
  terminated_ = over;
  auto out = make_output(active);
  out.rewards = rewards;
  for (std::size_t j = 0; j < n; ++j) {
    if (!active[j]) continue;
    const bool died = !uavs_[j].battery.alive;
    out.terminal[j] = died;
    out.done[j] = died || over;
  }

  auto& log = out.log;
  log.t = t_;
  log.step_duration = config_.step_duration;
  log.deployed = deployed();
  log.messages = messages;
  log.uavs.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& u = uavs_[j];
    auto& r = log.uavs[j];
    r.x = u.position.x;
    r.y = u.position.y;
    r.active = active[j];
    if (!active[j]) continue;
    r.speed = speeds[j];
    r.score = u.score;
    r.energy_j = u.step_energy;
    r.rate_bps = u.rate_bps;
    r.bits = u.rate_bps * config_.step_duration;
    r.reward = rewards[j];
  }
  if (options_.record_vehicles) {
    const auto entries = vehicles_.entries(t_);
    log.vehicles.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& link = links[i];
      log.vehicles.push_back({entries[i].id, entries[i].x, entries[i].y,
                              link.connected ? static_cast<int>(*link.serving_uav) : -1});
    }
  }
  return out;
}

}  // namespace dacemad::env
