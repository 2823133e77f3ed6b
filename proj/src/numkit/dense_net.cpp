#include "matchrep/numkit/dense_net.hpp"

#include <cmath>

#include "matchrep/error.hpp"

namespace matchrep::num {
namespace {

double activate(Activation a, double x) {
  switch (a) {
    case Activation::relu:
      return x > 0.0 ? x : 0.0;
    case Activation::tanh:
      return std::tanh(x);
    case Activation::identity:
      break;
  }
  return x;
}

// Derivative expressed through the post-activation value.
double activation_slope(Activation a, double out) {
  switch (a) {
    case Activation::relu:
      return out > 0.0 ? 1.0 : 0.0;
    case Activation::tanh:
      return 1.0 - out * out;
    case Activation::identity:
      break;
  }
  return 1.0;
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu:
      return "relu";
    case Activation::tanh:
      return "tanh";
    case Activation::identity:
      break;
  }
  return "identity";
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "identity") return Activation::identity;
  throw InvalidInputError("unknown activation '" + name + "'");
}

DenseNet::DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.bias.size() != layer.weight.cols()) {
      throw InvalidInputError("layer " + std::to_string(l) + ": bias length != fan_out");
    }
    if (l > 0 && layers_[l - 1].weight.cols() != layer.weight.rows()) {
      throw InvalidInputError("layer " + std::to_string(l) + ": fan_in does not chain");
    }
  }
}

DenseNet DenseNet::build(const std::vector<std::size_t>& dims, Activation hidden,
                         Activation output, RngStream& rng) {
  if (dims.size() < 2) throw InvalidInputError("DenseNet::build needs at least two dims");
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t fan_in = dims[l];
    const std::size_t fan_out = dims[l + 1];
    if (fan_in == 0 || fan_out == 0) throw InvalidInputError("DenseNet::build: zero width");
    DenseLayer layer;
    layer.weight = Matrix(fan_in, fan_out);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (auto& w : layer.weight.data()) w = rng.uniform(-limit, limit);
    layer.bias.assign(fan_out, 0.0);
    layer.activation = (l + 2 == dims.size()) ? output : hidden;
    layers.push_back(std::move(layer));
  }
  return DenseNet(std::move(layers));
}

std::size_t DenseNet::input_dim() const noexcept {
  return layers_.empty() ? 0 : layers_.front().weight.rows();
}

std::size_t DenseNet::output_dim() const noexcept {
  return layers_.empty() ? 0 : layers_.back().weight.cols();
}

std::size_t DenseNet::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<std::span<double>> DenseNet::parameter_blocks() {
  std::vector<std::span<double>> blocks;
  blocks.reserve(2 * layers_.size());
  for (auto& l : layers_) {
    blocks.push_back(l.weight.data());
    blocks.push_back(l.bias);
  }
  return blocks;
}

std::vector<std::span<const double>> NetGradients::blocks() const {
  std::vector<std::span<const double>> out;
  out.reserve(2 * weight.size());
  for (std::size_t l = 0; l < weight.size(); ++l) {
    out.push_back(weight[l].data());
    out.push_back(bias[l]);
  }
  return out;
}

ForwardPass mlp_forward(const DenseNet& net, const Matrix& batch) {
  if (net.empty()) throw InvalidInputError("mlp_forward: empty network");
  if (batch.cols() != net.input_dim()) {
    throw InvalidInputError("mlp_forward: batch has " + std::to_string(batch.cols()) +
                            " columns, network expects " + std::to_string(net.input_dim()));
  }
  ForwardPass pass;
  pass.activations.reserve(net.depth() + 1);
  pass.activations.push_back(batch);
  for (const auto& layer : net.layers()) {
    Matrix z = matmul(pass.activations.back(), layer.weight);
    for (std::size_t r = 0; r < z.rows(); ++r) {
      auto row = z.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        row[c] = activate(layer.activation, row[c] + layer.bias[c]);
      }
    }
    pass.activations.push_back(std::move(z));
  }
  return pass;
}

Matrix mlp_predict(const DenseNet& net, const Matrix& batch) {
  return std::move(mlp_forward(net, batch).activations.back());
}

NetGradients mlp_backward(const DenseNet& net, const ForwardPass& cache, const Matrix& upstream) {
  const auto& layers = net.layers();
  if (cache.activations.size() != layers.size() + 1) {
    throw InvalidInputError("mlp_backward: cache depth does not match network");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (cache.activations[l].cols() != layers[l].weight.rows() ||
        cache.activations[l + 1].cols() != layers[l].weight.cols()) {
      throw InvalidInputError("mlp_backward: stale cache (layer shapes changed)");
    }
  }
  if (!upstream.same_shape(cache.output())) {
    throw InvalidInputError("mlp_backward: upstream gradient shape mismatch");
  }

  NetGradients grads;
  grads.weight.resize(layers.size());
  grads.bias.resize(layers.size());

  Matrix delta = upstream;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    const Matrix& out = cache.activations[l + 1];
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      auto d = delta.row(r);
      auto o = out.row(r);
      for (std::size_t c = 0; c < d.size(); ++c) d[c] *= activation_slope(layer.activation, o[c]);
    }
    grads.weight[l] = matmul_at_b(cache.activations[l], delta);
    grads.bias[l].assign(layer.bias.size(), 0.0);
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      auto d = delta.row(r);
      for (std::size_t c = 0; c < d.size(); ++c) grads.bias[l][c] += d[c];
    }
    delta = matmul_a_bt(delta, layer.weight);
  }
  grads.input = std::move(delta);
  return grads;
}

}  // namespace matchrep::num
