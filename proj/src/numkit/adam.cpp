#include "matchrep/numkit/adam.hpp"

#include <cmath>
#include <string>

#include "matchrep/error.hpp"

namespace matchrep::num {

AdamState::AdamState(const std::vector<std::size_t>& block_sizes) {
  first_.reserve(block_sizes.size());
  second_.reserve(block_sizes.size());
  for (auto n : block_sizes) {
    first_.emplace_back(n, 0.0);
    second_.emplace_back(n, 0.0);
  }
}

void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state, double lr,
               const AdamConfig& config) {
  if (params.size() != grads.size() || params.size() != state.first_.size()) {
    throw InvalidInputError("adam_step: block count mismatch");
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].size() != grads[b].size() || params[b].size() != state.first_[b].size()) {
      throw InvalidInputError("adam_step: block " + std::to_string(b) + " shape mismatch");
    }
    for (double g : grads[b]) {
      if (!std::isfinite(g)) {
        throw DivergenceError("non-finite gradient in parameter block " + std::to_string(b) +
                              "; try a lower learning rate");
      }
    }
  }

  ++state.step_;
  const double t = static_cast<double>(state.step_);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto& m = state.first_[b];
    auto& v = state.second_[b];
    for (std::size_t i = 0; i < params[b].size(); ++i) {
      const double g = grads[b][i];
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      params[b][i] -= lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

}  // namespace matchrep::num
