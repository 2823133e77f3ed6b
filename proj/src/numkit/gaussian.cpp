#include "matchrep/numkit/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "matchrep/error.hpp"

namespace matchrep::num {

double DiagGaussian::log_density(std::span<const double> x) const {
  if (x.size() != dim()) throw InvalidInputError("log_density: dimension mismatch");
  double lp = 0.0;
  for (std::size_t d = 0; d < dim(); ++d) {
    const double diff = x[d] - mean[d];
    lp += -0.5 * (std::log(2.0 * std::numbers::pi * var[d]) + diff * diff / var[d]);
  }
  return lp;
}

DiagGaussian fit_diag_gaussian(const Matrix& points, double floor) {
  if (points.rows() < 2) {
    throw InsufficientDataError("fit_diag_gaussian needs at least 2 points, got " +
                                std::to_string(points.rows()));
  }
  DiagGaussian g;
  g.mean = column_means(points);
  g.var.assign(points.cols(), 0.0);
  for (std::size_t r = 0; r < points.rows(); ++r) {
    for (std::size_t c = 0; c < points.cols(); ++c) {
      const double d = points(r, c) - g.mean[c];
      g.var[c] += d * d;
    }
  }
  const double denom = static_cast<double>(points.rows() - 1);
  for (auto& v : g.var) v = std::max(v / denom, floor);
  return g;
}

double kl_gaussian_diag(const DiagGaussian& p, const DiagGaussian& q) {
  if (p.dim() != q.dim() || p.var.size() != p.dim() || q.var.size() != q.dim()) {
    throw InvalidInputError("kl_gaussian_diag: dimension mismatch");
  }
  double kl = 0.0;
  for (std::size_t d = 0; d < p.dim(); ++d) {
    const double diff = p.mean[d] - q.mean[d];
    kl += 0.5 * std::log(q.var[d] / p.var[d]) + (p.var[d] + diff * diff) / (2.0 * q.var[d]) - 0.5;
  }
  // Clamp tiny negative values produced by rounding when p == q.
  return kl < 0.0 ? 0.0 : kl;
}

KlGradient kl_gaussian_diag_gradient(const DiagGaussian& p, const DiagGaussian& q) {
  if (p.dim() != q.dim()) throw InvalidInputError("kl_gaussian_diag_gradient: dimension mismatch");
  KlGradient g;
  const std::size_t n = p.dim();
  g.d_mean_p.resize(n);
  g.d_var_p.resize(n);
  g.d_mean_q.resize(n);
  g.d_var_q.resize(n);
  for (std::size_t d = 0; d < n; ++d) {
    const double diff = p.mean[d] - q.mean[d];
    g.d_mean_p[d] = diff / q.var[d];
    g.d_mean_q[d] = -diff / q.var[d];
    g.d_var_p[d] = -0.5 / p.var[d] + 0.5 / q.var[d];
    g.d_var_q[d] = 0.5 / q.var[d] - (p.var[d] + diff * diff) / (2.0 * q.var[d] * q.var[d]);
  }
  return g;
}

}  // namespace matchrep::num
