#include "matchrep/numkit/kmeans.hpp"

#include <limits>
#include <string>

#include "matchrep/error.hpp"

namespace matchrep::num {
namespace {

Matrix seed_plus_plus(const Matrix& points, std::size_t k, RngStream& rng) {
  const std::size_t n = points.rows();
  Matrix centers(k, points.cols());
  std::size_t first = rng.uniform_int(n);
  for (std::size_t c = 0; c < points.cols(); ++c) centers(0, c) = points(first, c);

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points.row(i), centers.row(0));
  for (std::size_t j = 1; j < k; ++j) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick;
    if (total <= 0.0) {
      pick = rng.uniform_int(n);  // every point coincides with a chosen center
    } else {
      pick = rng.categorical(d2);
    }
    for (std::size_t c = 0; c < points.cols(); ++c) centers(j, c) = points(pick, c);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points.row(i), centers.row(j)));
    }
  }
  return centers;
}

KMeansResult lloyd(const Matrix& points, Matrix centers, const KMeansOptions& options) {
  const std::size_t n = points.rows();
  const std::size_t k = centers.rows();
  const std::size_t dim = points.cols();
  KMeansResult result;
  result.labels.assign(n, 0);

  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    // Assignment.
    std::vector<double> dist(n);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t j = 0; j < k; ++j) {
        const double d = squared_distance(points.row(i), centers.row(j));
        if (d < best) {
          best = d;
          arg = j;
        }
      }
      result.labels[i] = arg;
      dist[i] = best;
      ++counts[arg];
    }
    // Empty-cluster repair: steal the worst-served point.
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] > 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[result.labels[i]] > 1 && dist[i] > far_d) {
          far_d = dist[i];
          far = i;
        }
      }
      if (far_d < 0.0) break;  // fewer distinct donors than clusters
      --counts[result.labels[far]];
      result.labels[far] = j;
      ++counts[j];
      dist[far] = 0.0;
      for (std::size_t c = 0; c < dim; ++c) centers(j, c) = points(far, c);
      ++result.empty_cluster_repairs;
    }
    // Update.
    Matrix next(k, dim);
    for (std::size_t i = 0; i < n; ++i) {
      auto src = points.row(i);
      auto dst = next.row(result.labels[i]);
      for (std::size_t c = 0; c < dim; ++c) dst[c] += src[c];
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] == 0) {
        for (std::size_t c = 0; c < dim; ++c) next(j, c) = centers(j, c);
        continue;
      }
      for (std::size_t c = 0; c < dim; ++c) next(j, c) /= static_cast<double>(counts[j]);
    }
    centers = std::move(next);
    const double obj = kmeans_objective(points, centers, result.labels);
    result.iterations = iter + 1;
    const bool converged = !result.objective_trace.empty() &&
                           result.objective_trace.back() - obj <=
                               options.tolerance * std::max(result.objective_trace.back(), 1e-300);
    result.objective_trace.push_back(obj);
    if (converged) break;
  }
  result.centers = std::move(centers);
  return result;
}

}  // namespace

double kmeans_objective(const Matrix& points, const Matrix& centers,
                        const std::vector<std::size_t>& labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    total += squared_distance(points.row(i), centers.row(labels[i]));
  }
  return total;
}

std::vector<std::size_t> nearest_center(const Matrix& points, const Matrix& centers) {
  std::vector<std::size_t> labels(points.rows(), 0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centers.rows(); ++j) {
      const double d = squared_distance(points.row(i), centers.row(j));
      if (d < best) {
        best = d;
        labels[i] = j;
      }
    }
  }
  return labels;
}

KMeansResult kmeans_fit(const Matrix& points, std::size_t k, RngStream& rng,
                        const KMeansOptions& options) {
  if (k == 0) throw InvalidInputError("kmeans_fit: k must be positive");
  if (k > points.rows()) {
    throw InvalidInputError("kmeans_fit: k=" + std::to_string(k) + " exceeds n=" +
                            std::to_string(points.rows()));
  }
  KMeansResult best;
  const std::size_t restarts = std::max<std::size_t>(options.restarts, 1);
  for (std::size_t r = 0; r < restarts; ++r) {
    KMeansResult run = lloyd(points, seed_plus_plus(points, k, rng), options);
    if (r == 0 || run.objective() < best.objective()) best = std::move(run);
  }
  return best;
}

}  // namespace matchrep::num
