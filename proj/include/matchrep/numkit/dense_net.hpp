#pragma once
// Small fully connected networks with hand-written backpropagation.

#include <span>
#include <string>
#include <vector>

#include "matchrep/numkit/matrix.hpp"
#include "matchrep/numkit/rng.hpp"

namespace matchrep::num {

enum class Activation { relu, tanh, identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct DenseLayer {
  Matrix weight;  // fan_in x fan_out
  std::vector<double> bias;
  Activation activation = Activation::identity;
};

class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<DenseLayer> layers);

  // dims = {input, hidden..., output}. Weights ~ U(+-sqrt(6 / (fan_in + fan_out))),
  // biases zero.
  static DenseNet build(const std::vector<std::size_t>& dims, Activation hidden,
                        Activation output, RngStream& rng);

  std::size_t input_dim() const noexcept;
  std::size_t output_dim() const noexcept;
  std::size_t depth() const noexcept { return layers_.size(); }
  bool empty() const noexcept { return layers_.empty(); }
  std::size_t parameter_count() const noexcept;

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }

  // Weight and bias blocks in layer order: W0, b0, W1, b1, ...
  std::vector<std::span<double>> parameter_blocks();

  friend bool operator==(const DenseNet&, const DenseNet&) = default;

 private:
  std::vector<DenseLayer> layers_;
};

inline bool operator==(const DenseLayer& a, const DenseLayer& b) {
  return a.weight == b.weight && a.bias == b.bias && a.activation == b.activation;
}

// activations[0] is the input batch, activations[l + 1] the post-activation
// output of layer l.
struct ForwardPass {
  std::vector<Matrix> activations;
  const Matrix& output() const { return activations.back(); }
};

struct NetGradients {
  std::vector<Matrix> weight;
  std::vector<std::vector<double>> bias;
  Matrix input;  // gradient with respect to the input batch

  std::vector<std::span<const double>> blocks() const;
};

ForwardPass mlp_forward(const DenseNet& net, const Matrix& batch);
NetGradients mlp_backward(const DenseNet& net, const ForwardPass& cache, const Matrix& upstream);

// Convenience wrapper returning only the output.
Matrix mlp_predict(const DenseNet& net, const Matrix& batch);

}  // namespace matchrep::num
