#include "dacemad/agent.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "dacemad/binary_io.hpp"

namespace dacemad::agent {

namespace {

constexpr std::string_view kMagic = "DAGT0001";

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    stream};
  return std::mt19937_64(seq);
}

std::string rng_state(const std::mt19937_64& rng) {
  std::ostringstream s;
  s << rng;
  return s.str();
}

void restore_rng(std::mt19937_64& rng, const std::string& state) {
  std::istringstream s(state);
  s >> rng;
  if (!s) throw io::FormatError("corrupt RNG state in checkpoint");
}

std::vector<std::size_t> network_sizes(std::size_t observation_size,
                                       const LearningParams& params) {
  std::vector<std::size_t> sizes{observation_size};
  sizes.insert(sizes.end(), params.hidden_layers.begin(), params.hidden_layers.end());
  sizes.push_back(env::kNumActions);
  return sizes;
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::dacemad: return "dacemad";
    case Variant::cmad: return "cmad";
    case Variant::mad: return "mad";
    case Variant::random: return "random";
  }
  return "unknown";
}

std::optional<Variant> parse_variant(std::string_view name) {
  for (auto v : {Variant::dacemad, Variant::cmad, Variant::mad, Variant::random}) {
    if (name == to_string(v)) return v;
  }
  return std::nullopt;
}

env::EnvOptions env_options_for(Variant v) {
  env::EnvOptions o;
  o.share_state = v != Variant::mad;
  o.cooperative_reward = v != Variant::mad;
  return o;
}

void apply_variant_mask(Variant v, std::span<double> o) {
  if (v == Variant::dacemad || v == Variant::random) return;
  for (auto i : {env::obs::kScoreRatio, env::obs::kBestX, env::obs::kBestY,
                 env::obs::kHoodRatio}) {
    o[i] = 0.0;
  }
  if (v == Variant::mad) {
    std::fill(o.begin() + static_cast<std::ptrdiff_t>(env::obs::kFirstNeighbour), o.end(), 0.0);
  }
}

double epsilon_schedule(std::size_t episode, const LearningParams& p) {
  if (episode >= p.epsilon_decay_episodes) return p.epsilon_end;
  const double frac =
      static_cast<double>(episode) / static_cast<double>(p.epsilon_decay_episodes);
  return p.epsilon_start + (p.epsilon_end - p.epsilon_start) * frac;
}

std::size_t greedy_action(const Eigen::VectorXd& q) {
  std::size_t best = 0;
  for (Eigen::Index a = 1; a < q.size(); ++a) {
    if (q(a) > q(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(a);
  }
  return best;
}

double double_q_target(double reward, std::span<const double> next_state, bool terminal,
                       const nn::Mlp& online, const nn::Mlp& target, double discount) {
  if (terminal) return reward;
  const auto a_max = greedy_action(online.forward(next_state));
  return reward + discount * target.forward(next_state)(static_cast<Eigen::Index>(a_max));
}

DdqnAgent::DdqnAgent(std::size_t observation_size, const LearningParams& params,
                     Variant variant, std::uint64_t seed)
    : params_(params),
      variant_(variant),
      online_(network_sizes(observation_size, params)),
      target_(online_),
      buffer_(params.replay_capacity, observation_size),
      policy_rng_(make_rng(seed, 1)),
      replay_rng_(make_rng(seed, 2)),
      observation_size_(observation_size) {
  auto init_rng = make_rng(seed, 0);
  online_ = nn::Mlp::glorot(network_sizes(observation_size, params), init_rng);
  target_ = nn::copy_params(online_);
  optimiser_ = nn::RmsProp(online_, {params.learning_rate, params.rmsprop_decay,
                                     params.rmsprop_epsilon});
}

std::vector<double> DdqnAgent::masked(std::span<const double> observation) const {
  std::vector<double> o(observation.begin(), observation.end());
  apply_variant_mask(variant_, o);
  return o;
}

env::Action DdqnAgent::select_action(std::span<const double> observation, double epsilon) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> any(0, env::kNumActions - 1);
  // No draw at epsilon 0 so greedy evaluation leaves the policy stream untouched.
  if (variant_ == Variant::random || (epsilon > 0.0 && coin(policy_rng_) < epsilon)) {
    return env::action_from_index(any(policy_rng_));
  }
  return env::action_from_index(greedy_action(online_.forward(masked(observation))));
}

void DdqnAgent::remember(std::span<const double> state, env::Action action, double reward,
                         std::span<const double> next_state, bool terminal) {
  if (variant_ == Variant::random) return;
  buffer_.push(masked(state), env::index_of(action), reward, masked(next_state), terminal);
}

LearnDiagnostics DdqnAgent::learn_step() {
  LearnDiagnostics d;
  d.buffer_size = buffer_.size();
  d.learner_steps = learner_steps_;
  if (variant_ == Variant::random || buffer_.size() < params_.batch_size) return d;

  const auto batch = params_.batch_size;
  const auto cols = static_cast<Eigen::Index>(batch);
  const auto rows = static_cast<Eigen::Index>(observation_size_);
  d.batch_slots = buffer_.sample(batch, replay_rng_);

  Eigen::MatrixXd states(rows, cols);
  Eigen::MatrixXd next_states(rows, cols);
  for (Eigen::Index i = 0; i < cols; ++i) {
    const auto slot = d.batch_slots[static_cast<std::size_t>(i)];
    states.col(i) = buffer_.state(slot);
    next_states.col(i) = buffer_.next_state(slot);
  }
  const Eigen::MatrixXd q_online_next = online_.forward_batch(next_states);
  const Eigen::MatrixXd q_target_next = target_.forward_batch(next_states);

  const auto n_actions = static_cast<Eigen::Index>(env::kNumActions);
  Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(n_actions, cols);
  Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(n_actions, cols);
  for (Eigen::Index i = 0; i < cols; ++i) {
    const auto slot = d.batch_slots[static_cast<std::size_t>(i)];
    double y = buffer_.reward(slot);
    if (!buffer_.terminal(slot)) {
      const auto a_max = static_cast<Eigen::Index>(greedy_action(q_online_next.col(i)));
      y += params_.discount * q_target_next(a_max, i);
    }
    const auto a = static_cast<Eigen::Index>(buffer_.action(slot));
    targets(a, i) = y;
    mask(a, i) = 1.0;
  }

  auto result = nn::backward(online_, states, targets, mask);
  optimiser_.update(online_, result.grads);
  ++learner_steps_;
  if (learner_steps_ % params_.target_sync_period == 0) {
    target_ = nn::copy_params(online_);
    d.target_synced = true;
  }
  d.skipped = false;
  d.loss = result.loss;
  d.learner_steps = learner_steps_;
  return d;
}

void DdqnAgent::save(std::ostream& out, const env::DensityMemory& memory) const {
  io::write_magic(out, kMagic);
  io::write_string(out, to_string(variant_));
  io::write_u64(out, observation_size_);
  io::write_u64(out, learner_steps_);
  online_.save(out);
  target_.save(out);
  nn::save_parameter_set(out, optimiser_.cache());
  io::write_string(out, rng_state(policy_rng_));
  io::write_string(out, rng_state(replay_rng_));
  buffer_.save(out);
  io::write_u64(out, memory.best_score);
  io::write_f64(out, memory.best_position.x);
  io::write_f64(out, memory.best_position.y);
  io::write_u64(out, memory.best_neighbourhood_score);
}

DdqnAgent::Loaded DdqnAgent::load(std::istream& in, const LearningParams& params) {
  io::expect_magic(in, kMagic);
  const auto variant = parse_variant(io::read_string(in));
  if (!variant) throw io::FormatError("unknown variant in checkpoint");
  const auto obs_size = io::read_u64(in);
  if (obs_size == 0 || obs_size > 4096) throw io::FormatError("implausible observation size");

  Loaded loaded{DdqnAgent(obs_size, params, *variant, 0), {}};
  auto& a = loaded.agent;
  a.learner_steps_ = io::read_u64(in);
  a.online_ = nn::Mlp::load(in);
  a.target_ = nn::Mlp::load(in);
  if (a.online_.sizes() != network_sizes(obs_size, params) ||
      a.target_.sizes() != a.online_.sizes()) {
    throw io::FormatError("checkpoint network shape does not match the configuration");
  }
  a.optimiser_ = nn::RmsProp(a.online_, {params.learning_rate, params.rmsprop_decay,
                                         params.rmsprop_epsilon});
  a.optimiser_.cache() = nn::load_parameter_set(in);
  if (a.optimiser_.cache().layers.size() != a.online_.params().layers.size()) {
    throw io::FormatError("optimiser state does not match network");
  }
  restore_rng(a.policy_rng_, io::read_string(in));
  restore_rng(a.replay_rng_, io::read_string(in));
  a.buffer_ = ReplayBuffer::load(in);
  if (a.buffer_.state_size() != obs_size || a.buffer_.capacity() != params.replay_capacity) {
    throw io::FormatError("replay buffer does not match the configuration");
  }
  loaded.memory.best_score = io::read_u64(in);
  loaded.memory.best_position.x = io::read_f64(in);
  loaded.memory.best_position.y = io::read_f64(in);
  loaded.memory.best_neighbourhood_score = io::read_u64(in);
  return loaded;
}

}  // namespace dacemad::agent
