#pragma once
#include <string>
#include <vector>

#include "matchrep/numkit/gaussian.hpp"
#include "matchrep/numkit/matrix.hpp"
#include "matchrep/numkit/rng.hpp"

namespace matchrep::num {

struct GmmOptions {
  std::size_t max_iterations = 100;
  // Stop once the log-likelihood gain per iteration drops below this.
  double tolerance = 1e-10;
  double variance_floor = kVarianceFloor;
};

struct GmmResult {
  std::vector<double> weights;
  std::vector<DiagGaussian> components;
  Matrix responsibilities;  // n x k, rows sum to 1
  std::vector<double> log_likelihood_trace;
  std::vector<std::string> warnings;

  // Index of the largest responsibility per row, lowest index on ties.
  std::vector<std::size_t> hard_labels() const;
  // Posterior over components for one point.
  std::vector<double> posterior(std::span<const double> x) const;
};

// EM for a diagonal-covariance Gaussian mixture, seeded from k-means.
GmmResult gmm_em_fit(const Matrix& points, std::size_t k, RngStream& rng,
                     const GmmOptions& options = {});

// Total log-likelihood of points under the mixture.
double gmm_log_likelihood(const Matrix& points, const std::vector<double>& weights,
                          const std::vector<DiagGaussian>& components);

}  // namespace matchrep::num
