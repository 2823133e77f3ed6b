#include "matchrep/numkit/gmm.hpp"

#include <cmath>
#include <limits>

#include "matchrep/error.hpp"
#include "matchrep/numkit/kmeans.hpp"

namespace matchrep::num {
namespace {

// Log-sum-exp normalization of one row of log-joint values in place; returns
// the log normalizer.
double normalize_log_row(std::span<double> row) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : row) peak = std::max(peak, v);
  double total = 0.0;
  for (double& v : row) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : row) v /= total;
  return peak + std::log(total);
}

}  // namespace

std::vector<std::size_t> GmmResult::hard_labels() const {
  std::vector<std::size_t> labels(responsibilities.rows(), 0);
  for (std::size_t i = 0; i < responsibilities.rows(); ++i) {
    auto row = responsibilities.row(i);
    for (std::size_t j = 1; j < row.size(); ++j) {
      if (row[j] > row[labels[i]]) labels[i] = j;
    }
  }
  return labels;
}

std::vector<double> GmmResult::posterior(std::span<const double> x) const {
  std::vector<double> row(components.size());
  for (std::size_t j = 0; j < components.size(); ++j) {
    row[j] = std::log(weights[j]) + components[j].log_density(x);
  }
  normalize_log_row(row);
  return row;
}

double gmm_log_likelihood(const Matrix& points, const std::vector<double>& weights,
                          const std::vector<DiagGaussian>& components) {
  double total = 0.0;
  std::vector<double> row(components.size());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    for (std::size_t j = 0; j < components.size(); ++j) {
      row[j] = std::log(weights[j]) + components[j].log_density(points.row(i));
    }
    total += normalize_log_row(row);
  }
  return total;
}

GmmResult gmm_em_fit(const Matrix& points, std::size_t k, RngStream& rng,
                     const GmmOptions& options) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  if (k == 0) throw InvalidInputError("gmm_em_fit: k must be positive");
  if (k > n) {
    throw InvalidInputError("gmm_em_fit: k=" + std::to_string(k) + " exceeds n=" +
                            std::to_string(n));
  }

  GmmResult result;
  result.responsibilities = Matrix(n, k);

  // Hard k-means partition as the first E-step.
  const auto init = kmeans_fit(points, k, rng);
  for (std::size_t i = 0; i < n; ++i) result.responsibilities(i, init.labels[i]) = 1.0;

  bool floor_warned = false;
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    // M-step.
    result.weights.assign(k, 0.0);
    result.components.assign(k, DiagGaussian{std::vector<double>(dim, 0.0),
                                              std::vector<double>(dim, 0.0)});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double r = result.responsibilities(i, j);
        result.weights[j] += r;
        for (std::size_t c = 0; c < dim; ++c) result.components[j].mean[c] += r * points(i, c);
      }
    }
    for (std::size_t j = 0; j < k; ++j) {
      const double nj = std::max(result.weights[j], 1e-300);
      for (auto& m : result.components[j].mean) m /= nj;
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double r = result.responsibilities(i, j);
        for (std::size_t c = 0; c < dim; ++c) {
          const double d = points(i, c) - result.components[j].mean[c];
          result.components[j].var[c] += r * d * d;
        }
      }
    }
    for (std::size_t j = 0; j < k; ++j) {
      const double nj = std::max(result.weights[j], 1e-300);
      for (auto& v : result.components[j].var) {
        v /= nj;
        if (!(v >= options.variance_floor)) {
          v = options.variance_floor;
          if (!floor_warned) {
            result.warnings.push_back("component " + std::to_string(j) +
                                      " variance underflow; floored at " +
                                      std::to_string(options.variance_floor));
            floor_warned = true;
          }
        }
      }
      result.weights[j] = std::max(result.weights[j] / static_cast<double>(n), 1e-300);
    }

    // E-step; the normalizers sum to the log-likelihood of the new parameters.
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto row = result.responsibilities.row(i);
      for (std::size_t j = 0; j < k; ++j) {
        row[j] = std::log(result.weights[j]) + result.components[j].log_density(points.row(i));
      }
      ll += normalize_log_row(row);
    }
    const bool converged = !result.log_likelihood_trace.empty() &&
                           ll - result.log_likelihood_trace.back() <
                               options.tolerance * std::max(1.0, std::abs(ll));
    result.log_likelihood_trace.push_back(ll);
    if (converged) break;
  }
  return result;
}

}  // namespace matchrep::num
