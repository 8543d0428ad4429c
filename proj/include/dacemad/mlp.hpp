#pragma once

// Fully connected network with ReLU hidden layers and a linear output,
// trained with masked mean-squared error and RMSprop.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace dacemad::nn {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Layer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

// Weights and biases of every layer; also used for gradients and the
// RMSprop second-moment cache, which share the same shapes.
struct ParameterSet {
  std::vector<Layer> layers;

  ParameterSet zeros_like() const;
  std::size_t parameter_count() const;
  bool all_finite() const;
  bool operator==(const ParameterSet& other) const;
};

class Mlp {
 public:
  // Layer sizes including input and output, e.g. {27, 128, 64, 5}.
  explicit Mlp(std::vector<std::size_t> sizes);

  // Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static Mlp glorot(std::vector<std::size_t> sizes, std::mt19937_64& rng);

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }

  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

  Eigen::VectorXd forward(std::span<const double> input) const;
  // One sample per column.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const;

  void save(std::ostream& out) const;
  static Mlp load(std::istream& in);

  bool operator==(const Mlp& other) const {
    return sizes_ == other.sizes_ && params_ == other.params_;
  }

 private:
  std::vector<std::size_t> sizes_;
  ParameterSet params_;
};

// Independent deep copy (target-network refresh).
inline Mlp copy_params(const Mlp& source) { return source; }

struct LossAndGrad {
  double loss = 0.0;
  ParameterSet grads;
};

// Mean squared error over the masked outputs. `targets` and `mask` are
// output_size x batch; each column of `mask` must select exactly one output.
LossAndGrad backward(const Mlp& net, const Eigen::MatrixXd& inputs,
                     const Eigen::MatrixXd& targets, const Eigen::MatrixXd& mask);

struct RmsPropOptions {
  double learning_rate = 1e-4;
  double decay = 0.99;
  double epsilon = 1e-8;
};

class RmsProp {
 public:
  RmsProp() = default;
  RmsProp(const Mlp& net, RmsPropOptions options);

  // cache = decay * cache + (1 - decay) * g^2
  // param -= lr * g / (sqrt(cache) + eps)
  void update(Mlp& net, const ParameterSet& grads);

  const ParameterSet& cache() const { return cache_; }
  ParameterSet& cache() { return cache_; }
  const RmsPropOptions& options() const { return options_; }

 private:
  RmsPropOptions options_;
  ParameterSet cache_;
};

void save_parameter_set(std::ostream& out, const ParameterSet& params);
ParameterSet load_parameter_set(std::istream& in);

}  // namespace dacemad::nn
