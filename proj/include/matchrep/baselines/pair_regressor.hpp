#pragma once
// Direct outcome regressors on the concatenated (recipient, donor) feature
// pair. No clustering is involved; these serve as scorers for allocation
// policies and as comparison rows.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "matchrep/baselines/cart.hpp"
#include "matchrep/baselines/linear.hpp"
#include "matchrep/data/dataset.hpp"
#include "matchrep/numkit/dense_net.hpp"

namespace matchrep::baselines {

enum class PairKind { reg_nn, reg_tree, lasso, ridge, elasticnet };

std::string to_string(PairKind kind);
PairKind pair_kind_from_string(const std::string& name);
const std::vector<PairKind>& all_pair_kinds();

struct PairRegressorOptions {
  double ridge_penalty = 1e-3;
  double lasso_lambda = 1.0;
  double elasticnet_lambda = 1.0;
  double elasticnet_l1_ratio = 0.5;
  TreeOptions tree;
  std::vector<std::size_t> nn_hidden = {32, 32};
  std::size_t nn_epochs = 200;
  std::size_t nn_batch_size = 128;
  double nn_learning_rate = 1e-3;
  std::uint64_t seed = 0;
};

struct NeuralRegressor {
  num::DenseNet net;
  double y_shift = 0.0;
  double y_scale = 1.0;

  friend bool operator==(const NeuralRegressor&, const NeuralRegressor&) = default;
};

class PairRegressor {
 public:
  PairKind kind = PairKind::ridge;
  std::variant<LinearModel, RegressionTree, NeuralRegressor> model;
  std::size_t recipient_dim = 0;
  std::size_t donor_dim = 0;
  // Feature statistics of the training data, applied by callers to raw input.
  std::optional<data::Normalization> normalization;
  std::vector<std::string> warnings;

  double predict(std::span<const double> x_r, std::span<const double> x_o) const;
  // One prediction per row pair.
  std::vector<double> predict(const num::Matrix& recipients, const num::Matrix& donors) const;

  nlohmann::json to_json() const;  // full envelope, kind "pair-<name>"
  static PairRegressor from_json(const nlohmann::json& j);

  friend bool operator==(const PairRegressor& a, const PairRegressor& b) {
    return a.kind == b.kind && a.model == b.model && a.recipient_dim == b.recipient_dim &&
           a.donor_dim == b.donor_dim && a.normalization == b.normalization;
  }
};

PairRegressor fit_pair_regressor(const data::Dataset& dataset, PairKind kind,
                                 const PairRegressorOptions& options = {});

double predict_pair(const PairRegressor& regressor, std::span<const double> x_r,
                    std::span<const double> x_o);

}  // namespace matchrep::baselines
