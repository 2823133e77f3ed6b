#include "matchrep/baselines/linear.hpp"

#include <algorithm>
#include <cmath>

#include "matchrep/error.hpp"
#include "matchrep/numkit/linalg.hpp"

namespace matchrep::baselines {

using num::Matrix;

double LinearModel::predict(std::span<const double> x) const {
  if (x.size() != coef.size()) throw InvalidInputError("linear model: feature width mismatch");
  double v = intercept;
  for (std::size_t c = 0; c < coef.size(); ++c) v += coef[c] * x[c];
  return v;
}

std::vector<double> LinearModel::predict(const Matrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict(x.row(r));
  return out;
}

nlohmann::json LinearModel::to_json() const {
  return {{"coef", coef}, {"intercept", intercept}};
}

LinearModel LinearModel::from_json(const nlohmann::json& j) {
  try {
    return {j.at("coef").get<std::vector<double>>(), j.at("intercept").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("linear model: ") + e.what());
  }
}

namespace {

struct Centered {
  Matrix x;
  std::vector<double> y;
  std::vector<double> x_mean;
  double y_mean = 0.0;
};

Centered center(const Matrix& x, const std::vector<double>& y) {
  if (x.rows() != y.size() || y.empty()) {
    throw InvalidInputError("linear fit: need matching, non-empty X and y");
  }
  Centered c{x, y, num::column_means(x), 0.0};
  for (double v : y) c.y_mean += v;
  c.y_mean /= static_cast<double>(y.size());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t k = 0; k < x.cols(); ++k) c.x(r, k) -= c.x_mean[k];
  }
  for (double& v : c.y) v -= c.y_mean;
  return c;
}

double intercept_for(const Centered& c, const std::vector<double>& coef) {
  double b0 = c.y_mean;
  for (std::size_t k = 0; k < coef.size(); ++k) b0 -= coef[k] * c.x_mean[k];
  return b0;
}

}  // namespace

RidgeFit fit_ridge(const Matrix& x, const std::vector<double>& y, double penalty) {
  if (!(penalty >= 0.0)) throw InvalidInputError("ridge penalty must be nonnegative");
  const Centered c = center(x, y);
  const std::size_t d = x.cols();
  Matrix gram(d, d);
  std::vector<double> xty(d, 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = c.x.row(r);
    for (std::size_t a = 0; a < d; ++a) {
      xty[a] += row[a] * c.y[r];
      for (std::size_t b = 0; b < d; ++b) gram(a, b) += row[a] * row[b];
    }
  }
  RidgeFit fit;
  double lambda = penalty;
  for (int attempt = 0; attempt < 40; ++attempt) {
    Matrix a = gram;
    for (std::size_t k = 0; k < d; ++k) a(k, k) += lambda;
    if (auto sol = num::solve_spd(a, xty)) {
      fit.model.coef = std::move(*sol);
      fit.model.intercept = intercept_for(c, fit.model.coef);
      fit.penalty_used = lambda;
      return fit;
    }
    const double raised = lambda > 0.0 ? lambda * 10.0 : 1e-8;
    fit.warnings.push_back("ridge system singular at penalty " + std::to_string(lambda) +
                           "; raised to " + std::to_string(raised));
    lambda = raised;
  }
  throw DivergenceError("ridge: normal equations stayed singular");
}

ElasticNetFit fit_elastic_net(const Matrix& x, const std::vector<double>& y,
                              const ElasticNetOptions& o) {
  if (!(o.lambda >= 0.0) || !(o.l1_ratio >= 0.0 && o.l1_ratio <= 1.0)) {
    throw InvalidInputError("elastic net: lambda >= 0 and l1_ratio in [0, 1] required");
  }
  const Centered c = center(x, y);
  const std::size_t n = x.rows(), d = x.cols();
  const double nn = static_cast<double>(n);
  // Unscaled form: 1/2 ||r||^2 + a ||b||_1 + b2/2 ||b||^2.
  const double a = nn * o.lambda * o.l1_ratio;
  const double b2 = nn * o.lambda * (1.0 - o.l1_ratio);

  std::vector<double> col_sq(d, 0.0), coef(d, 0.0), resid = c.y;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < d; ++k) col_sq[k] += c.x(r, k) * c.x(r, k);
  }
  double yty = 0.0;
  for (double v : c.y) yty += v * v;

  auto objective = [&] {
    double rr = 0.0, l1 = 0.0, l2 = 0.0;
    for (double v : resid) rr += v * v;
    for (double v : coef) l1 += std::abs(v), l2 += v * v;
    return (0.5 * rr + a * l1 + 0.5 * b2 * l2) / nn;
  };
  auto gap = [&] {
    double rr = 0.0, ry = 0.0, l1 = 0.0, l2 = 0.0, dual_norm = 0.0;
    for (std::size_t r = 0; r < n; ++r) rr += resid[r] * resid[r], ry += resid[r] * c.y[r];
    for (std::size_t k = 0; k < d; ++k) {
      double xtr = 0.0;
      for (std::size_t r = 0; r < n; ++r) xtr += c.x(r, k) * resid[r];
      dual_norm = std::max(dual_norm, std::abs(xtr - b2 * coef[k]));
      l1 += std::abs(coef[k]);
      l2 += coef[k] * coef[k];
    }
    double scale = 1.0, g = 0.0;
    if (dual_norm > a) {
      scale = a / dual_norm;
      g = 0.5 * (rr + rr * scale * scale);
    } else {
      g = rr;
    }
    return g + a * l1 - scale * ry + 0.5 * b2 * (1.0 + scale * scale) * l2;
  };

  ElasticNetFit fit;
  const double tol = o.tolerance * yty;
  for (std::size_t sweep = 1; sweep <= o.max_sweeps; ++sweep) {
    for (std::size_t k = 0; k < d; ++k) {
      if (col_sq[k] == 0.0) continue;
      const double old = coef[k];
      double rho = 0.0;
      for (std::size_t r = 0; r < n; ++r) rho += c.x(r, k) * resid[r];
      rho += col_sq[k] * old;
      const double shrunk = std::copysign(std::max(std::abs(rho) - a, 0.0), rho);
      const double updated = shrunk / (col_sq[k] + b2);
      if (updated != old) {
        const double delta = updated - old;
        for (std::size_t r = 0; r < n; ++r) resid[r] -= delta * c.x(r, k);
        coef[k] = updated;
      }
    }
    fit.objective_trace.push_back(objective());
    fit.sweeps = sweep;
    fit.duality_gap = gap();
    if (fit.duality_gap <= tol) {
      fit.converged = true;
      break;
    }
  }
  fit.model.coef = coef;
  fit.model.intercept = intercept_for(c, coef);
  return fit;
}

}  // namespace matchrep::baselines
