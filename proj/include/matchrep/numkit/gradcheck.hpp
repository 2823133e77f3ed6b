#pragma once
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace matchrep::num {

// A parameter block perturbed in place by the checker, paired with the
// analytic gradient it should match.
struct GradientBlock {
  std::string name;
  std::span<double> params;
  std::span<const double> analytic;
};

struct BlockCheck {
  std::string name;
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::size_t worst_index = 0;
  bool passed = true;
};

struct GradientCheckReport {
  std::vector<BlockCheck> blocks;
  double max_relative_error = 0.0;
  bool passed = true;
};

// Central differences (f(x+h) - f(x-h)) / 2h against the analytic gradient.
// Relative error is |a - n| / max(|a|, |n|, abs_floor); parameters are restored.
GradientCheckReport finite_diff_check(const std::function<double()>& loss,
                                      std::span<const GradientBlock> blocks, double h = 1e-4,
                                      double tol = 1e-4, double abs_floor = 1e-6);

}  // namespace matchrep::num
