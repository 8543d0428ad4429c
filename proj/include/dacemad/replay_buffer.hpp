#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace dacemad::agent {

struct Transition {
  std::vector<double> state;
  std::size_t action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
};

// Fixed-capacity ring of transitions; the oldest entry is overwritten first.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t state_size);

  void push(std::span<const double> state, std::size_t action, double reward,
            std::span<const double> next_state, bool terminal);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t state_size() const { return state_size_; }

  // Uniform sample of distinct slot indices.
  std::vector<std::size_t> sample(std::size_t count, std::mt19937_64& rng);

  // i-th oldest stored transition.
  Transition at_age(std::size_t i) const;
  // Transition stored in a slot returned by sample().
  Transition at_slot(std::size_t slot) const;

  auto state(std::size_t slot) const { return states_.col(static_cast<Eigen::Index>(slot)); }
  auto next_state(std::size_t slot) const {
    return next_states_.col(static_cast<Eigen::Index>(slot));
  }
  std::size_t action(std::size_t slot) const { return actions_[slot]; }
  double reward(std::size_t slot) const { return rewards_[slot]; }
  bool terminal(std::size_t slot) const { return terminals_[slot] != 0; }

  void save(std::ostream& out) const;
  static ReplayBuffer load(std::istream& in);

 private:
  std::size_t capacity_;
  std::size_t state_size_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;  // next slot to write
  Eigen::MatrixXd states_;
  Eigen::MatrixXd next_states_;
  std::vector<std::uint8_t> actions_;
  std::vector<double> rewards_;
  std::vector<std::uint8_t> terminals_;
  // Permutation of [0, size) reused by partial Fisher-Yates sampling.
  std::vector<std::size_t> order_;
};

}  // namespace dacemad::agent
