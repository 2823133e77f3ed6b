#include "matchrep/numkit/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "matchrep/error.hpp"

namespace matchrep::num {

GradientCheckReport finite_diff_check(const std::function<double()>& loss,
                                      std::span<const GradientBlock> blocks, double h,
                                      double tol, double abs_floor) {
  GradientCheckReport report;
  for (const auto& block : blocks) {
    if (block.params.size() != block.analytic.size()) {
      throw InvalidInputError("finite_diff_check: block '" + block.name + "' size mismatch");
    }
    BlockCheck check;
    check.name = block.name;
    for (std::size_t i = 0; i < block.params.size(); ++i) {
      const double saved = block.params[i];
      block.params[i] = saved + h;
      const double up = loss();
      block.params[i] = saved - h;
      const double down = loss();
      block.params[i] = saved;

      const double numeric = (up - down) / (2.0 * h);
      const double analytic = block.analytic[i];
      const double abs_err = std::abs(numeric - analytic);
      const double rel_err =
          abs_err / std::max({std::abs(numeric), std::abs(analytic), abs_floor});
      if (rel_err > check.max_relative_error) {
        check.max_relative_error = rel_err;
        check.worst_index = i;
      }
      check.max_absolute_error = std::max(check.max_absolute_error, abs_err);
    }
    check.passed = check.max_relative_error <= tol;
    report.passed = report.passed && check.passed;
    report.max_relative_error = std::max(report.max_relative_error, check.max_relative_error);
    report.blocks.push_back(std::move(check));
  }
  return report;
}

}  // namespace matchrep::num
