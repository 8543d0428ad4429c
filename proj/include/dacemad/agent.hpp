#pragma once

// Per-UAV double deep Q-learner and its ablation variants.
//
//   dacemad  full observation, cooperative reward
//   cmad     density fields (C/C*, x*, y*, C_o/C_o*) zeroed
//   mad      density and neighbour fields zeroed, no cooperative factor
//   random   uniform actions, never learns

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dacemad/config.hpp"
#include "dacemad/environment.hpp"
#include "dacemad/mlp.hpp"
#include "dacemad/replay_buffer.hpp"

namespace dacemad::agent {

enum class Variant { dacemad, cmad, mad, random };

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view name);
env::EnvOptions env_options_for(Variant v);

// Zeroes the observation fields a variant does not see.
void apply_variant_mask(Variant v, std::span<double> observation);

// Linear from epsilon_start to epsilon_end over epsilon_decay_episodes.
double epsilon_schedule(std::size_t episode, const LearningParams& params);

// Index of the largest Q-value; ties go to the lowest index.
std::size_t greedy_action(const Eigen::VectorXd& q);

// y = r for terminal transitions, otherwise
// y = r + gamma * Q_target(s', argmax_a Q_online(s', a)).
double double_q_target(double reward, std::span<const double> next_state, bool terminal,
                       const nn::Mlp& online, const nn::Mlp& target, double discount);

struct LearnDiagnostics {
  bool skipped = true;
  double loss = 0.0;
  std::size_t buffer_size = 0;
  std::size_t learner_steps = 0;
  bool target_synced = false;
  std::vector<std::size_t> batch_slots;
};

class DdqnAgent {
 public:
  DdqnAgent(std::size_t observation_size, const LearningParams& params, Variant variant,
            std::uint64_t seed);

  Variant variant() const { return variant_; }

  std::vector<double> masked(std::span<const double> observation) const;

  env::Action select_action(std::span<const double> observation, double epsilon);
  void remember(std::span<const double> state, env::Action action, double reward,
                std::span<const double> next_state, bool terminal);
  LearnDiagnostics learn_step();

  const nn::Mlp& online() const { return online_; }
  const nn::Mlp& target() const { return target_; }
  nn::Mlp& online() { return online_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  std::size_t learner_steps() const { return learner_steps_; }
  const LearningParams& params() const { return params_; }

  // Complete learner state, including replay contents and RNG streams, so a
  // resumed run continues exactly where it stopped.
  void save(std::ostream& out, const env::DensityMemory& memory) const;
  struct Loaded;
  static Loaded load(std::istream& in, const LearningParams& params);

 private:
  LearningParams params_;
  Variant variant_;
  nn::Mlp online_;
  nn::Mlp target_;
  nn::RmsProp optimiser_;
  ReplayBuffer buffer_;
  std::mt19937_64 policy_rng_;
  std::mt19937_64 replay_rng_;
  std::size_t learner_steps_ = 0;
  std::size_t observation_size_;
};

struct DdqnAgent::Loaded {
  DdqnAgent agent;
  env::DensityMemory memory;
};

}  // namespace dacemad::agent
