#include "dacemad/replay_buffer.hpp"

#include <stdexcept>
#include <string>

#include "dacemad/binary_io.hpp"

namespace dacemad::agent {

namespace {
constexpr std::string_view kMagic = "DRPL0001";
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t state_size)
    : capacity_(capacity),
      state_size_(state_size),
      states_(static_cast<Eigen::Index>(state_size), static_cast<Eigen::Index>(capacity)),
      next_states_(static_cast<Eigen::Index>(state_size), static_cast<Eigen::Index>(capacity)),
      actions_(capacity),
      rewards_(capacity),
      terminals_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be >= 1");
  states_.setZero();
  next_states_.setZero();
}

void ReplayBuffer::push(std::span<const double> state, std::size_t action, double reward,
                        std::span<const double> next_state, bool terminal) {
  if (state.size() != state_size_ || next_state.size() != state_size_) {
    throw std::invalid_argument("replay buffer: state size mismatch");
  }
  const auto slot = static_cast<Eigen::Index>(head_);
  states_.col(slot) =
      Eigen::Map<const Eigen::VectorXd>(state.data(), static_cast<Eigen::Index>(state_size_));
  next_states_.col(slot) = Eigen::Map<const Eigen::VectorXd>(
      next_state.data(), static_cast<Eigen::Index>(state_size_));
  actions_[head_] = static_cast<std::uint8_t>(action);
  rewards_[head_] = reward;
  terminals_[head_] = terminal ? 1 : 0;
  head_ = (head_ + 1) % capacity_;
  if (size_ < capacity_) {
    order_.push_back(size_);
    ++size_;
  }
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t count, std::mt19937_64& rng) {
  if (count > size_) throw std::invalid_argument("replay buffer: sample larger than buffer");
  std::vector<std::size_t> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, size_ - 1);
    std::swap(order_[i], order_[pick(rng)]);
    out[i] = order_[i];
  }
  return out;
}

Transition ReplayBuffer::at_slot(std::size_t slot) const {
  if (slot >= size_) throw std::out_of_range("replay buffer slot " + std::to_string(slot));
  const auto s = state(slot);
  const auto n = next_state(slot);
  return {{s.data(), s.data() + s.size()},
          actions_[slot],
          rewards_[slot],
          {n.data(), n.data() + n.size()},
          terminals_[slot] != 0};
}

Transition ReplayBuffer::at_age(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay buffer index " + std::to_string(i));
  const auto oldest = size_ < capacity_ ? 0 : head_;
  return at_slot((oldest + i) % capacity_);
}

void ReplayBuffer::save(std::ostream& out) const {
  io::write_magic(out, kMagic);
  io::write_u64(out, capacity_);
  io::write_u64(out, state_size_);
  io::write_u64(out, size_);
  io::write_u64(out, head_);
  const auto used = static_cast<std::size_t>(size_ * state_size_);
  io::write_f64s(out, {states_.data(), used});
  io::write_f64s(out, {next_states_.data(), used});
  for (std::size_t i = 0; i < size_; ++i) {
    io::write_u64(out, actions_[i]);
    io::write_f64(out, rewards_[i]);
    io::write_u64(out, terminals_[i]);
  }
  for (std::size_t i = 0; i < size_; ++i) io::write_u64(out, order_[i]);
}

ReplayBuffer ReplayBuffer::load(std::istream& in) {
  io::expect_magic(in, kMagic);
  const auto capacity = io::read_u64(in);
  const auto state_size = io::read_u64(in);
  if (capacity == 0 || capacity > (1ULL << 26) || state_size == 0 || state_size > 4096) {
    throw io::FormatError("implausible replay buffer shape");
  }
  ReplayBuffer b(capacity, state_size);
  b.size_ = io::read_u64(in);
  b.head_ = io::read_u64(in);
  if (b.size_ > capacity || b.head_ >= capacity) throw io::FormatError("bad replay buffer cursor");
  const auto used = static_cast<std::size_t>(b.size_ * state_size);
  io::read_f64s(in, {b.states_.data(), used});
  io::read_f64s(in, {b.next_states_.data(), used});
  for (std::size_t i = 0; i < b.size_; ++i) {
    b.actions_[i] = static_cast<std::uint8_t>(io::read_u64(in));
    b.rewards_[i] = io::read_f64(in);
    b.terminals_[i] = static_cast<std::uint8_t>(io::read_u64(in));
  }
  b.order_.resize(b.size_);
  for (std::size_t i = 0; i < b.size_; ++i) {
    b.order_[i] = io::read_u64(in);
    if (b.order_[i] >= b.size_) throw io::FormatError("bad replay buffer permutation");
  }
  return b;
}

}  // namespace dacemad::agent
