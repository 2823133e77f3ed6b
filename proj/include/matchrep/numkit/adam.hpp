#pragma once
#include <cstddef>
#include <span>
#include <vector>

namespace matchrep::num {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First and second moment estimates for a fixed list of parameter blocks.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(const std::vector<std::size_t>& block_sizes);

  std::size_t step() const noexcept { return step_; }
  std::size_t block_count() const noexcept { return first_.size(); }

 private:
  friend void adam_step(std::span<const std::span<double>>, std::span<const std::span<const double>>,
                        AdamState&, double, const AdamConfig&);
  std::size_t step_ = 0;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
};

// One bias-corrected Adam update. Throws DivergenceError on a non-finite
// gradient before touching any parameter.
void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state, double lr,
               const AdamConfig& config = {});

}  // namespace matchrep::num
