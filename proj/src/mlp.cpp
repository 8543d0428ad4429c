#include "dacemad/mlp.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "dacemad/binary_io.hpp"

namespace dacemad::nn {

namespace {

constexpr std::string_view kMlpMagic = "DMLP0001";
constexpr std::string_view kParamMagic = "DPAR0001";

void check_sizes(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) throw ShapeError("network needs at least input and output sizes");
  for (auto s : sizes) {
    if (s == 0) throw ShapeError("layer sizes must be positive");
  }
}

void write_layer(std::ostream& out, const Layer& layer) {
  io::write_u64(out, static_cast<std::uint64_t>(layer.weight.rows()));
  io::write_u64(out, static_cast<std::uint64_t>(layer.weight.cols()));
  io::write_f64s(out, {layer.weight.data(), static_cast<std::size_t>(layer.weight.size())});
  io::write_f64s(out, {layer.bias.data(), static_cast<std::size_t>(layer.bias.size())});
}

Layer read_layer(std::istream& in) {
  const auto rows = io::read_u64(in);
  const auto cols = io::read_u64(in);
  if (rows == 0 || cols == 0 || rows > (1u << 20) || cols > (1u << 20)) {
    throw io::FormatError("implausible layer shape in checkpoint");
  }
  Layer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
  io::read_f64s(in, {layer.weight.data(), static_cast<std::size_t>(layer.weight.size())});
  io::read_f64s(in, {layer.bias.data(), static_cast<std::size_t>(layer.bias.size())});
  return layer;
}

}  // namespace

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out;
  out.layers.reserve(layers.size());
  for (const auto& l : layers) {
    out.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                          Eigen::VectorXd::Zero(l.bias.size())});
  }
  return out;
}

std::size_t ParameterSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

bool ParameterSet::all_finite() const {
  for (const auto& l : layers) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

bool ParameterSet::operator==(const ParameterSet& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& a = layers[i];
    const auto& b = other.layers[i];
    if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols() ||
        a.bias.size() != b.bias.size()) {
      return false;
    }
    if (a.weight != b.weight || a.bias != b.bias) return false;
  }
  return true;
}

Mlp::Mlp(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
  check_sizes(sizes_);
  for (std::size_t i = 0; i + 1 < sizes_.size(); ++i) {
    const auto in = static_cast<Eigen::Index>(sizes_[i]);
    const auto out = static_cast<Eigen::Index>(sizes_[i + 1]);
    params_.layers.push_back({Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)});
  }
}

Mlp Mlp::glorot(std::vector<std::size_t> sizes, std::mt19937_64& rng) {
  Mlp net(std::move(sizes));
  for (auto& layer : net.params_.layers) {
    const double fan = static_cast<double>(layer.weight.rows() + layer.weight.cols());
    const double limit = std::sqrt(6.0 / fan);
    std::uniform_real_distribution<double> dist(-limit, limit);
    // Fixed element order so the draw sequence does not depend on storage.
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(rng);
    }
  }
  return net;
}

Eigen::VectorXd Mlp::forward(std::span<const double> input) const {
  if (input.size() != input_size()) {
    throw ShapeError("forward: expected input of length " + std::to_string(input_size()) +
                     ", got " + std::to_string(input.size()));
  }
  Eigen::MatrixXd x =
      Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<Eigen::Index>(input.size()));
  return forward_batch(x).col(0);
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& inputs) const {
  if (static_cast<std::size_t>(inputs.rows()) != input_size()) {
    throw ShapeError("forward_batch: input rows do not match network input size");
  }
  Eigen::MatrixXd a = inputs;
  const auto n = params_.layers.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& layer = params_.layers[i];
    Eigen::MatrixXd z = layer.weight * a;
    z.colwise() += layer.bias;
    if (i + 1 < n) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

LossAndGrad backward(const Mlp& net, const Eigen::MatrixXd& inputs,
                     const Eigen::MatrixXd& targets, const Eigen::MatrixXd& mask) {
  const auto batch = inputs.cols();
  if (batch == 0) throw ShapeError("backward: empty batch");
  if (static_cast<std::size_t>(inputs.rows()) != net.input_size()) {
    throw ShapeError("backward: input rows do not match network input size");
  }
  const auto out_rows = static_cast<Eigen::Index>(net.output_size());
  if (targets.rows() != out_rows || targets.cols() != batch || mask.rows() != out_rows ||
      mask.cols() != batch) {
    throw ShapeError("backward: targets/mask must be output_size x batch");
  }
  for (Eigen::Index c = 0; c < batch; ++c) {
    if (mask.col(c).sum() != 1.0 || (mask.col(c).array() * (1.0 - mask.col(c).array())).any()) {
      throw ShapeError("backward: mask must select exactly one output per sample");
    }
  }

  const auto& layers = net.params().layers;
  const auto n = layers.size();
  // Pre-activations and activations, activations[0] = input.
  std::vector<Eigen::MatrixXd> pre(n);
  std::vector<Eigen::MatrixXd> act(n + 1);
  act[0] = inputs;
  for (std::size_t i = 0; i < n; ++i) {
    pre[i] = layers[i].weight * act[i];
    pre[i].colwise() += layers[i].bias;
    act[i + 1] = (i + 1 < n) ? Eigen::MatrixXd(pre[i].cwiseMax(0.0)) : pre[i];
  }

  const double count = static_cast<double>(batch);
  const Eigen::MatrixXd diff = (act[n] - targets).cwiseProduct(mask);
  LossAndGrad out;
  out.loss = diff.squaredNorm() / count;
  out.grads = net.params().zeros_like();

  Eigen::MatrixXd delta = (2.0 / count) * diff;
  for (std::size_t k = n; k-- > 0;) {
    out.grads.layers[k].weight.noalias() = delta * act[k].transpose();
    out.grads.layers[k].bias = delta.rowwise().sum();
    if (k > 0) {
      Eigen::MatrixXd back = layers[k].weight.transpose() * delta;
      delta = back.cwiseProduct((pre[k - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return out;
}

RmsProp::RmsProp(const Mlp& net, RmsPropOptions options)
    : options_(options), cache_(net.params().zeros_like()) {}

void RmsProp::update(Mlp& net, const ParameterSet& grads) {
  auto& layers = net.params().layers;
  if (grads.layers.size() != layers.size() || cache_.layers.size() != layers.size()) {
    throw ShapeError("rmsprop: parameter/gradient layer count mismatch");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& g = grads.layers[i];
    if (g.weight.rows() != layers[i].weight.rows() || g.weight.cols() != layers[i].weight.cols() ||
        g.bias.size() != layers[i].bias.size()) {
      throw ShapeError("rmsprop: gradient shape mismatch in layer " + std::to_string(i));
    }
  }
  if (!grads.all_finite()) throw NumericError("rmsprop: non-finite gradient");

  const double rho = options_.decay;
  const double lr = options_.learning_rate;
  const double eps = options_.epsilon;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto& p = layers[i];
    auto& c = cache_.layers[i];
    const auto& g = grads.layers[i];
    c.weight.array() = rho * c.weight.array() + (1.0 - rho) * g.weight.array().square();
    c.bias.array() = rho * c.bias.array() + (1.0 - rho) * g.bias.array().square();
    p.weight.array() -= lr * g.weight.array() / (c.weight.array().sqrt() + eps);
    p.bias.array() -= lr * g.bias.array() / (c.bias.array().sqrt() + eps);
  }
}

void save_parameter_set(std::ostream& out, const ParameterSet& params) {
  io::write_magic(out, kParamMagic);
  io::write_u64(out, params.layers.size());
  for (const auto& l : params.layers) write_layer(out, l);
}

ParameterSet load_parameter_set(std::istream& in) {
  io::expect_magic(in, kParamMagic);
  const auto n = io::read_u64(in);
  if (n > 64) throw io::FormatError("implausible layer count in checkpoint");
  ParameterSet p;
  for (std::uint64_t i = 0; i < n; ++i) p.layers.push_back(read_layer(in));
  return p;
}

void Mlp::save(std::ostream& out) const {
  io::write_magic(out, kMlpMagic);
  io::write_u64(out, sizes_.size());
  for (auto s : sizes_) io::write_u64(out, s);
  save_parameter_set(out, params_);
}

Mlp Mlp::load(std::istream& in) {
  io::expect_magic(in, kMlpMagic);
  const auto n = io::read_u64(in);
  if (n < 2 || n > 65) throw io::FormatError("implausible layer-size count in checkpoint");
  std::vector<std::size_t> sizes;
  for (std::uint64_t i = 0; i < n; ++i) sizes.push_back(io::read_u64(in));
  Mlp net(sizes);
  auto params = load_parameter_set(in);
  if (params.layers.size() != net.params_.layers.size()) {
    throw io::FormatError("checkpoint layer count does not match declared sizes");
  }
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const auto& want = net.params_.layers[i];
    const auto& got = params.layers[i];
    if (want.weight.rows() != got.weight.rows() || want.weight.cols() != got.weight.cols()) {
      throw io::FormatError("checkpoint layer " + std::to_string(i) + " has the wrong shape");
    }
  }
  net.params_ = std::move(params);
  if (!net.params_.all_finite()) throw io::FormatError("checkpoint contains non-finite values");
  return net;
}

}  // namespace dacemad::nn
