#pragma once
// Penalized linear regression with an unpenalized intercept.

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "matchrep/numkit/matrix.hpp"

namespace matchrep::baselines {

struct LinearModel {
  std::vector<double> coef;
  double intercept = 0.0;

  double predict(std::span<const double> x) const;
  std::vector<double> predict(const num::Matrix& x) const;

  nlohmann::json to_json() const;
  static LinearModel from_json(const nlohmann::json& j);

  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

struct RidgeFit {
  LinearModel model;
  double penalty_used = 0.0;
  std::vector<std::string> warnings;
};

// Minimizes ||y - X b - b0||^2 + penalty * ||b||^2 in closed form. If the
// normal equations are not positive definite the penalty is raised tenfold
// (starting from 1e-8) until they are, with a warning.
RidgeFit fit_ridge(const num::Matrix& x, const std::vector<double>& y, double penalty);

struct ElasticNetOptions {
  double lambda = 1.0;
  double l1_ratio = 1.0;  // 1 = lasso
  // Stop once the duality gap falls below tolerance * y_c' y_c.
  double tolerance = 1e-6;
  std::size_t max_sweeps = 10000;
};

struct ElasticNetFit {
  LinearModel model;
  // Primal objective after each full coordinate sweep.
  std::vector<double> objective_trace;
  double duality_gap = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
};

// Cyclic coordinate descent on
//   (1/2n) ||y - X b - b0||^2 + lambda * (l1_ratio ||b||_1 + (1 - l1_ratio)/2 ||b||^2).
ElasticNetFit fit_elastic_net(const num::Matrix& x, const std::vector<double>& y,
                              const ElasticNetOptions& options);

}  // namespace matchrep::baselines
