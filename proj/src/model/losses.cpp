#include "matchrep/model/losses.hpp"

#include <algorithm>
#include <cmath>

#include "matchrep/error.hpp"
#include "matchrep/numkit/gaussian.hpp"

namespace matchrep::model {

using num::Matrix;

namespace {

constexpr double kProbabilityClamp = 1e-12;

void check_centers(const Matrix& embedded, const Matrix& centers) {
  if (embedded.cols() != centers.cols()) {
    throw InvalidInputError("soft_assign: embedding and center dimensions differ");
  }
  if (centers.rows() == 0) throw InvalidInputError("soft_assign: no centers");
}

// Kernel values (1 + D_ij)^a and the distances D_ij.
void kernel(const Matrix& embedded, const Matrix& centers, double a, Matrix& q, Matrix& dist) {
  q = Matrix(embedded.rows(), centers.rows());
  dist = Matrix(embedded.rows(), centers.rows());
  for (std::size_t i = 0; i < embedded.rows(); ++i) {
    for (std::size_t j = 0; j < centers.rows(); ++j) {
      const double d = num::squared_distance(embedded.row(i), centers.row(j));
      dist(i, j) = d;
      q(i, j) = std::pow(1.0 + d, a);
    }
  }
}

Matrix normalize_rows(Matrix q) {
  for (std::size_t i = 0; i < q.rows(); ++i) {
    double s = 0.0;
    for (double v : q.row(i)) s += v;
    for (double& v : q.row(i)) v /= s;
  }
  return q;
}

// Moments of a subset of rows plus the per-entry gradient factors.
struct Moments {
  num::DiagGaussian fit;
  std::vector<bool> floored;
};

Moments moments(const Matrix& x, const std::vector<std::size_t>& rows) {
  const Matrix sub = num::select_rows(x, rows);
  Moments m;
  m.fit = num::fit_diag_gaussian(sub);
  m.floored.resize(x.cols());
  for (std::size_t c = 0; c < x.cols(); ++c) m.floored[c] = m.fit.var[c] <= num::kVarianceFloor;
  return m;
}

// Accumulates dL/dx for rows given dL/dmean and dL/dvar of their fit.
void push_back_moments(const Matrix& x, const std::vector<std::size_t>& rows, const Moments& m,
                       const std::vector<double>& d_mean, const std::vector<double>& d_var,
                       Matrix& grad) {
  const double n = static_cast<double>(rows.size());
  for (auto i : rows) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      double g = d_mean[c] / n;
      if (!m.floored[c]) g += d_var[c] * 2.0 * (x(i, c) - m.fit.mean[c]) / (n - 1.0);
      grad(i, c) += g;
    }
  }
}

}  // namespace

Matrix soft_assign(const Matrix& embedded, const Matrix& centers, double exponent) {
  check_centers(embedded, centers);
  Matrix q, dist;
  kernel(embedded, centers, exponent, q, dist);
  return normalize_rows(std::move(q));
}

Matrix target_distribution(const Matrix& t) {
  const std::size_t k = t.cols();
  std::vector<double> freq(k, 0.0);
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < k; ++j) freq[j] += t(i, j);
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (!(freq[j] > 0.0)) {
      throw DeadClusterError("cluster " + std::to_string(j) + " has zero total soft assignment", j);
    }
  }
  Matrix p(t.rows(), k);
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < k; ++j) p(i, j) = t(i, j) * t(i, j) / freq[j];
  }
  return normalize_rows(std::move(p));
}

std::vector<std::size_t> argmax_rows(const Matrix& m) {
  std::vector<std::size_t> out(m.rows(), 0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 1; j < m.cols(); ++j) {
      if (m(i, j) > m(i, out[i])) out[i] = j;
    }
  }
  return out;
}

double dec_loss_value(const Matrix& t, const Matrix& p) {
  if (!t.same_shape(p)) throw InvalidInputError("dec_loss: T and P shapes differ");
  double loss = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double pij = p.data()[i];
    if (pij > 0.0) loss += pij * std::log(pij / std::max(t.data()[i], kProbabilityClamp));
  }
  return std::max(loss, 0.0);
}

DecLoss dec_loss(const Matrix& embedded, const Matrix& centers, const Matrix& p, double exponent) {
  check_centers(embedded, centers);
  Matrix q, dist;
  kernel(embedded, centers, exponent, q, dist);
  const Matrix t = normalize_rows(q);
  if (!t.same_shape(p)) throw InvalidInputError("dec_loss: T and P shapes differ");

  DecLoss out;
  for (double v : t.data()) {
    if (v < kProbabilityClamp) ++out.clamped;
  }
  out.value = dec_loss_value(t, p);
  out.d_embedded = Matrix(embedded.rows(), embedded.cols());
  out.d_centers = Matrix(centers.rows(), centers.cols());
  for (std::size_t i = 0; i < embedded.rows(); ++i) {
    double p_row = 0.0;
    for (std::size_t j = 0; j < centers.rows(); ++j) p_row += p(i, j);
    for (std::size_t j = 0; j < centers.rows(); ++j) {
      // dL/dlog q_ij = t_ij * sum_j' p_ij' - p_ij
      const double coef = (t(i, j) * p_row - p(i, j)) * 2.0 * exponent / (1.0 + dist(i, j));
      for (std::size_t c = 0; c < embedded.cols(); ++c) {
        const double g = coef * (embedded(i, c) - centers(j, c));
        out.d_embedded(i, c) += g;
        out.d_centers(j, c) -= g;
      }
    }
  }
  return out;
}

RepLoss rep_loss(const Matrix& rep, const std::vector<std::size_t>& labels, std::size_t k,
                 std::size_t min_count, KlDirection direction) {
  if (labels.size() != rep.rows()) throw InvalidInputError("rep_loss: label count mismatch");
  RepLoss out;
  out.d_rep = Matrix(rep.rows(), rep.cols());
  std::vector<std::vector<std::size_t>> groups(k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= k) throw InvalidInputError("rep_loss: label out of range");
    groups[labels[i]].push_back(i);
  }
  const std::size_t threshold = std::max<std::size_t>(min_count, 2);
  std::vector<std::size_t> all(rep.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  if (rep.rows() < 2) {
    out.skipped = true;
    return out;
  }
  const Moments marginal = moments(rep, all);
  std::vector<double> d_mean_all(rep.cols(), 0.0), d_var_all(rep.cols(), 0.0);

  for (const auto& g : groups) {
    if (g.size() < threshold) continue;
    const Moments cond = moments(rep, g);
    const bool forward = direction == KlDirection::conditional_to_marginal;
    const auto& p = forward ? cond.fit : marginal.fit;
    const auto& q = forward ? marginal.fit : cond.fit;
    out.value += num::kl_gaussian_diag(p, q);
    const auto grad = num::kl_gaussian_diag_gradient(p, q);
    const auto& dm_cond = forward ? grad.d_mean_p : grad.d_mean_q;
    const auto& dv_cond = forward ? grad.d_var_p : grad.d_var_q;
    const auto& dm_marg = forward ? grad.d_mean_q : grad.d_mean_p;
    const auto& dv_marg = forward ? grad.d_var_q : grad.d_var_p;
    push_back_moments(rep, g, cond, dm_cond, dv_cond, out.d_rep);
    for (std::size_t c = 0; c < rep.cols(); ++c) {
      d_mean_all[c] += dm_marg[c];
      d_var_all[c] += dv_marg[c];
    }
    ++out.clusters_used;
  }
  if (out.clusters_used == 0) {
    out.skipped = true;
    return out;
  }
  push_back_moments(rep, all, marginal, d_mean_all, d_var_all, out.d_rep);
  return out;
}

FactualLoss factual_loss(const Matrix& pred, const std::vector<double>& y,
                         const std::vector<std::size_t>& labels) {
  if (pred.rows() != y.size() || labels.size() != y.size()) {
    throw InvalidInputError("factual_loss: batch size mismatch");
  }
  FactualLoss out;
  out.d_pred = Matrix(pred.rows(), pred.cols());
  if (y.empty()) return out;
  const double n = static_cast<double>(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (labels[i] >= pred.cols()) throw InvalidInputError("factual_loss: label out of range");
    const double r = pred(i, labels[i]) - y[i];
    out.value += r * r / n;
    out.d_pred(i, labels[i]) = 2.0 * r / n;
  }
  return out;
}

}  // namespace matchrep::model
