#pragma once
// Evaluation metrics for potential-outcome predictions and cluster recovery.
//
// Predictions and truths are n x K matrices: row i is recipient i's outcome
// under each donor type.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "matchrep/numkit/matrix.hpp"

namespace matchrep::metrics {

// (1/n) sum_i (pred[i][k_i] - y_i)^2
double eps_factual(const num::Matrix& pred, const std::vector<std::size_t>& factual_types,
                   const std::vector<double>& outcomes);

// (1/n) sum_i sum_k (pred[i][k] - truth[i][k])^2
double eps_wmse(const num::Matrix& pred, const num::Matrix& truth);

// Fraction of rows whose argmax agree; ties resolve to the lowest index on
// both sides.
double aodt(const num::Matrix& pred, const num::Matrix& truth);

// (1/n) sum_i max_k pred[i][k]
double mean_best_prediction(const num::Matrix& pred);

// Among recipients with recipient_type == type_filter whose original donor
// type equals donor_filter, the fraction whose new donor type differs.
// Recipients without an assignment under either policy (-1) are excluded.
// Returns nullopt when no recipient qualifies.
std::optional<double> flipped_ratio(const std::vector<int>& original_donor_types,
                                    const std::vector<int>& new_donor_types,
                                    const std::vector<int>& recipient_types, int type_filter,
                                    int donor_filter);

double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

// Re-expresses true potentials (n x K_true) in the coordinates of K learned
// clusters: column j becomes sum_k P(true k | learned j) * truth[., k], with
// the conditional estimated from paired (learned, true) donor labels.
// Learned clusters with no donors use the marginal type frequencies, unless
// `alias` (one entry per learned cluster) points them at another cluster, in
// which case they copy that cluster's column.
num::Matrix project_truth(const num::Matrix& truth, const std::vector<std::size_t>& learned,
                          const std::vector<std::size_t>& true_types, std::size_t k_learned,
                          const std::vector<std::size_t>& alias = {});

struct EvalReport {
  std::string model;
  double eps_f = 0.0;
  std::optional<double> eps_wmse;
  std::optional<double> aodt;
  double mean_best_prediction = 0.0;
  std::size_t n = 0;

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

}  // namespace matchrep::metrics
