#include "matchrep/metrics/metrics.hpp"

#include <map>

#include "matchrep/data/csv.hpp"
#include "matchrep/error.hpp"

namespace matchrep::metrics {

using num::Matrix;

namespace {

std::size_t argmax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;
  }
  return best;
}

void same_shape(const Matrix& a, const Matrix& b, const char* who) {
  if (!a.same_shape(b)) throw InvalidInputError(std::string(who) + ": shape mismatch");
  if (a.rows() == 0) throw InvalidInputError(std::string(who) + ": no records");
}

double choose2(double n) { return n * (n - 1.0) / 2.0; }

}  // namespace

double eps_factual(const Matrix& pred, const std::vector<std::size_t>& factual_types,
                   const std::vector<double>& outcomes) {
  if (pred.rows() != outcomes.size() || factual_types.size() != outcomes.size()) {
    throw InvalidInputError("eps_factual: length mismatch");
  }
  if (outcomes.empty()) throw InvalidInputError("eps_factual: no records");
  double s = 0.0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (factual_types[i] >= pred.cols()) throw InvalidInputError("eps_factual: type out of range");
    const double d = pred(i, factual_types[i]) - outcomes[i];
    s += d * d;
  }
  return s / static_cast<double>(outcomes.size());
}

double eps_wmse(const Matrix& pred, const Matrix& truth) {
  same_shape(pred, truth, "eps_wmse");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.data()[i] - truth.data()[i];
    s += d * d;
  }
  return s / static_cast<double>(pred.rows());
}

double aodt(const Matrix& pred, const Matrix& truth) {
  same_shape(pred, truth, "aodt");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.rows(); ++i) {
    if (argmax(pred.row(i)) == argmax(truth.row(i))) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pred.rows());
}

double mean_best_prediction(const Matrix& pred) {
  if (pred.rows() == 0) throw InvalidInputError("mean_best_prediction: no records");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.rows(); ++i) s += pred(i, argmax(pred.row(i)));
  return s / static_cast<double>(pred.rows());
}

std::optional<double> flipped_ratio(const std::vector<int>& original_donor_types,
                                    const std::vector<int>& new_donor_types,
                                    const std::vector<int>& recipient_types, int type_filter,
                                    int donor_filter) {
  if (original_donor_types.size() != new_donor_types.size() ||
      recipient_types.size() != new_donor_types.size()) {
    throw InvalidInputError("flipped_ratio: assignment logs cover different recipients");
  }
  std::size_t eligible = 0, flipped = 0;
  for (std::size_t i = 0; i < recipient_types.size(); ++i) {
    if (recipient_types[i] != type_filter || original_donor_types[i] != donor_filter) continue;
    if (new_donor_types[i] < 0) continue;
    ++eligible;
    if (new_donor_types[i] != donor_filter) ++flipped;
  }
  if (eligible == 0) return std::nullopt;
  return static_cast<double>(flipped) / static_cast<double>(eligible);
}

double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) throw InvalidInputError("adjusted_rand_index: length mismatch");
  const double n = static_cast<double>(a.size());
  if (a.size() < 2) return 1.0;
  std::map<std::pair<std::size_t, std::size_t>, double> table;
  std::map<std::size_t, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, v] : table) index += choose2(v);
  for (const auto& [key, v] : rows) sum_a += choose2(v);
  for (const auto& [key, v] : cols) sum_b += choose2(v);
  const double expected = sum_a * sum_b / choose2(n);
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;  // both partitions trivial and identical
  return (index - expected) / (max_index - expected);
}

Matrix project_truth(const Matrix& truth, const std::vector<std::size_t>& learned,
                     const std::vector<std::size_t>& true_types, std::size_t k_learned,
                     const std::vector<std::size_t>& alias) {
  if (learned.size() != true_types.size() || learned.empty()) {
    throw InvalidInputError("project_truth: label vectors must be non-empty and equal length");
  }
  const std::size_t k_true = truth.cols();
  Matrix cond(k_learned, k_true);
  std::vector<double> marginal(k_true, 0.0), count(k_learned, 0.0);
  for (std::size_t i = 0; i < learned.size(); ++i) {
    if (learned[i] >= k_learned || true_types[i] >= k_true) {
      throw InvalidInputError("project_truth: label out of range");
    }
    cond(learned[i], true_types[i]) += 1.0;
    count[learned[i]] += 1.0;
    marginal[true_types[i]] += 1.0 / static_cast<double>(learned.size());
  }
  for (std::size_t j = 0; j < k_learned; ++j) {
    for (std::size_t k = 0; k < k_true; ++k) {
      cond(j, k) = count[j] > 0 ? cond(j, k) / count[j] : marginal[k];
    }
  }
  if (!alias.empty()) {
    if (alias.size() != k_learned) throw InvalidInputError("project_truth: alias size mismatch");
    for (std::size_t j = 0; j < k_learned; ++j) {
      const std::size_t src = alias[j];
      if (src >= k_learned) throw InvalidInputError("project_truth: alias out of range");
      if (src == j || count[j] > 0) continue;
      for (std::size_t k = 0; k < k_true; ++k) cond(j, k) = cond(src, k);
    }
  }
  return num::matmul_a_bt(truth, cond);
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j{{"model", model},
                   {"eps_f", eps_f},
                   {"mean_best_prediction", mean_best_prediction},
                   {"n", n}};
  j["eps_wmse"] = eps_wmse ? nlohmann::json(*eps_wmse) : nlohmann::json(nullptr);
  j["aodt"] = aodt ? nlohmann::json(*aodt) : nlohmann::json(nullptr);
  return j;
}

std::string EvalReport::csv_header() {
  return "model,eps_f,eps_wmse,aodt,mean_best_prediction,n";
}

std::string EvalReport::csv_row() const {
  auto opt = [](const std::optional<double>& v) {
    return v ? data::format_double(*v) : std::string("n.a.");
  };
  return model + "," + data::format_double(eps_f) + "," + opt(eps_wmse) + "," + opt(aodt) + "," +
         data::format_double(mean_best_prediction) + "," + std::to_string(n);
}

}  // namespace matchrep::metrics
