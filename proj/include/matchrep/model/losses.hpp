#pragma once
// Loss terms of the jointly trained model, each returning its value together
// with hand-derived gradients.

#include <cstddef>
#include <vector>

#include "matchrep/numkit/matrix.hpp"

namespace matchrep::model {

enum class KlDirection { conditional_to_marginal, marginal_to_conditional };

// Student-t style soft assignment: row i holds (1 + |z_i - mu_j|^2)^exponent,
// normalized over j.
num::Matrix soft_assign(const num::Matrix& embedded, const num::Matrix& centers,
                        double exponent = -0.5);

// Sharpened target p_ij = (t_ij^2 / f_j) / sum_j' (t_ij'^2 / f_j'), f_j = sum_i t_ij.
// A column with f_j == 0 raises DeadClusterError carrying j.
num::Matrix target_distribution(const num::Matrix& t);

// Hard labels, ties to the lowest index.
std::vector<std::size_t> argmax_rows(const num::Matrix& m);

struct DecLoss {
  double value = 0.0;
  num::Matrix d_embedded;  // n x embed_dim
  num::Matrix d_centers;   // K x embed_dim
  std::size_t clamped = 0;  // entries of t raised to 1e-12
};

// sum_i sum_j p_ij log(p_ij / t_ij) with t = soft_assign(embedded, centers);
// p is a constant target.
DecLoss dec_loss(const num::Matrix& embedded, const num::Matrix& centers, const num::Matrix& p,
                 double exponent = -0.5);

// Value only, from precomputed matrices.
double dec_loss_value(const num::Matrix& t, const num::Matrix& p);

struct RepLoss {
  double value = 0.0;
  num::Matrix d_rep;  // gradient with respect to the representation batch
  std::size_t clusters_used = 0;
  bool skipped = false;  // no cluster reached min_count
};

// Sum over clusters with at least min_count members of the KL divergence
// between the diagonal-Gaussian fit of that cluster and the fit of the whole
// batch. Gradients flow through both moment fits.
RepLoss rep_loss(const num::Matrix& rep, const std::vector<std::size_t>& labels, std::size_t k,
                 std::size_t min_count = 8,
                 KlDirection direction = KlDirection::conditional_to_marginal);

struct FactualLoss {
  double value = 0.0;
  num::Matrix d_pred;  // n x K, nonzero only at each row's label
};

// mean_i (pred_i[label_i] - y_i)^2
FactualLoss factual_loss(const num::Matrix& pred, const std::vector<double>& y,
                         const std::vector<std::size_t>& labels);

}  // namespace matchrep::model
