#pragma once
#include <cstddef>
#include <vector>

#include "matchrep/numkit/matrix.hpp"
#include "matchrep/numkit/rng.hpp"

namespace matchrep::num {

struct KMeansOptions {
  std::size_t max_iterations = 300;
  // Stop when the relative objective decrease falls below this.
  double tolerance = 1e-10;
  // Independent k-means++ seedings; the lowest final objective wins.
  std::size_t restarts = 4;
};

struct KMeansResult {
  Matrix centers;
  std::vector<std::size_t> labels;
  // Objective after every assignment + update round of the winning restart.
  std::vector<double> objective_trace;
  std::size_t iterations = 0;
  std::size_t empty_cluster_repairs = 0;

  double objective() const { return objective_trace.empty() ? 0.0 : objective_trace.back(); }
};

// Lloyd's algorithm with k-means++ seeding. An empty cluster takes the point
// currently farthest from its own center as its new center.
KMeansResult kmeans_fit(const Matrix& points, std::size_t k, RngStream& rng,
                        const KMeansOptions& options = {});

// Sum of squared distances of points to their assigned centers.
double kmeans_objective(const Matrix& points, const Matrix& centers,
                        const std::vector<std::size_t>& labels);

std::vector<std::size_t> nearest_center(const Matrix& points, const Matrix& centers);

}  // namespace matchrep::num
