#pragma once
#include <span>
#include <vector>

#include "matchrep/numkit/matrix.hpp"

namespace matchrep::num {

inline constexpr double kVarianceFloor = 1e-6;

// Axis-aligned Gaussian; var holds per-dimension variances.
struct DiagGaussian {
  std::vector<double> mean;
  std::vector<double> var;

  std::size_t dim() const noexcept { return mean.size(); }
  double log_density(std::span<const double> x) const;
};

// Per-dimension sample mean and unbiased (n - 1) variance, floored at `floor`.
DiagGaussian fit_diag_gaussian(const Matrix& points, double floor = kVarianceFloor);

// KL(p || q) = sum_d log(sigma_q / sigma_p) + (var_p + (mu_p - mu_q)^2) / (2 var_q) - 1/2
double kl_gaussian_diag(const DiagGaussian& p, const DiagGaussian& q);

// Partial derivatives of kl_gaussian_diag with respect to both argument's
// moments, one entry per dimension.
struct KlGradient {
  std::vector<double> d_mean_p, d_var_p, d_mean_q, d_var_q;
};
KlGradient kl_gaussian_diag_gradient(const DiagGaussian& p, const DiagGaussian& q);

}  // namespace matchrep::num
