#include "matchrep/baselines/pair_regressor.hpp"

#include <cmath>
#include <numeric>

#include "matchrep/error.hpp"
#include "matchrep/model/serialize.hpp"
#include "matchrep/numkit/adam.hpp"

namespace matchrep::baselines {

using num::Matrix;
using nlohmann::json;

namespace {

const std::vector<std::pair<PairKind, std::string>> kNames = {{PairKind::reg_nn, "reg-nn"},
                                                              {PairKind::reg_tree, "reg-tree"},
                                                              {PairKind::lasso, "lasso"},
                                                              {PairKind::ridge, "ridge"},
                                                              {PairKind::elasticnet, "elasticnet"}};

Matrix concat_features(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw InvalidInputError("pair features: row counts differ");
  Matrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    std::copy(a.row(r).begin(), a.row(r).end(), out.row(r).begin());
    std::copy(b.row(r).begin(), b.row(r).end(), out.row(r).begin() + static_cast<long>(a.cols()));
  }
  return out;
}

NeuralRegressor fit_neural(const Matrix& x, const std::vector<double>& y,
                           const PairRegressorOptions& o) {
  num::RngStream root = num::RngStream(o.seed).split("reg-nn");
  num::RngStream init = root.split("init");
  num::RngStream shuffle = root.split("batches");
  std::vector<std::size_t> dims{x.cols()};
  dims.insert(dims.end(), o.nn_hidden.begin(), o.nn_hidden.end());
  dims.push_back(1);
  NeuralRegressor r;
  r.net = num::DenseNet::build(dims, num::Activation::relu, num::Activation::identity, init);

  double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double sq = 0.0;
  for (double v : y) sq += (v - mean) * (v - mean);
  const double sd = std::sqrt(sq / static_cast<double>(y.size()));
  r.y_shift = mean;
  r.y_scale = sd > 0.0 ? sd : 1.0;

  std::vector<std::size_t> sizes;
  for (auto b : r.net.parameter_blocks()) sizes.push_back(b.size());
  num::AdamState state(sizes);
  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < o.nn_epochs; ++epoch) {
    shuffle.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += o.nn_batch_size) {
      const std::size_t end = std::min(order.size(), start + o.nn_batch_size);
      std::span<const std::size_t> rows(order.data() + start, end - start);
      const auto pass = num::mlp_forward(r.net, num::select_rows(x, rows));
      Matrix up(rows.size(), 1);
      const double scale = 2.0 / static_cast<double>(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        up(i, 0) = scale * (pass.output()(i, 0) - (y[rows[i]] - r.y_shift) / r.y_scale);
      }
      const auto g = num::mlp_backward(r.net, pass, up);
      auto params = r.net.parameter_blocks();
      const auto grads = g.blocks();
      try {
        num::adam_step(params, grads, state, o.nn_learning_rate);
      } catch (const DivergenceError&) {
        throw DivergenceError("reg-nn gradient is not finite; lower the learning rate");
      }
    }
  }
  return r;
}

}  // namespace

std::string to_string(PairKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  throw InvalidInputError("unknown pair regressor kind");
}

PairKind pair_kind_from_string(const std::string& name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  throw ConfigError("unknown pair regressor '" + name +
                    "' (expected reg-nn, reg-tree, lasso, ridge or elasticnet)");
}

const std::vector<PairKind>& all_pair_kinds() {
  static const std::vector<PairKind> kinds{PairKind::reg_nn, PairKind::reg_tree, PairKind::lasso,
                                           PairKind::ridge, PairKind::elasticnet};
  return kinds;
}

double PairRegressor::predict(std::span<const double> x_r, std::span<const double> x_o) const {
  if (x_r.size() != recipient_dim || x_o.size() != donor_dim) {
    throw InvalidInputError("pair regressor: feature width mismatch");
  }
  std::vector<double> x(x_r.begin(), x_r.end());
  x.insert(x.end(), x_o.begin(), x_o.end());
  if (const auto* lin = std::get_if<LinearModel>(&model)) return lin->predict(x);
  if (const auto* tree = std::get_if<RegressionTree>(&model)) return tree->predict(x);
  const auto& nn = std::get<NeuralRegressor>(model);
  Matrix row(1, x.size());
  std::copy(x.begin(), x.end(), row.row(0).begin());
  return num::mlp_predict(nn.net, row)(0, 0) * nn.y_scale + nn.y_shift;
}

std::vector<double> PairRegressor::predict(const Matrix& recipients, const Matrix& donors) const {
  if (recipients.cols() != recipient_dim || donors.cols() != donor_dim) {
    throw InvalidInputError("pair regressor: feature width mismatch");
  }
  const Matrix x = concat_features(recipients, donors);
  if (const auto* lin = std::get_if<LinearModel>(&model)) return lin->predict(x);
  if (const auto* tree = std::get_if<RegressionTree>(&model)) return tree->predict(x);
  const auto& nn = std::get<NeuralRegressor>(model);
  const Matrix out = num::mlp_predict(nn.net, x);
  std::vector<double> v(out.rows());
  for (std::size_t r = 0; r < out.rows(); ++r) v[r] = out(r, 0) * nn.y_scale + nn.y_shift;
  return v;
}

json PairRegressor::to_json() const {
  json j = model::make_envelope("pair-" + to_string(kind));
  j["recipient_dim"] = recipient_dim;
  j["donor_dim"] = donor_dim;
  j["normalization"] = normalization ? model::normalization_to_json(*normalization) : json(nullptr);
  if (const auto* lin = std::get_if<LinearModel>(&model)) {
    j["linear"] = lin->to_json();
  } else if (const auto* tree = std::get_if<RegressionTree>(&model)) {
    j["tree"] = tree->to_json();
  } else {
    const auto& nn = std::get<NeuralRegressor>(model);
    j["net"] = model::net_to_json(nn.net);
    j["y_shift"] = nn.y_shift;
    j["y_scale"] = nn.y_scale;
  }
  return j;
}

PairRegressor PairRegressor::from_json(const json& j) {
  const std::string kind = model::envelope_kind(j);
  if (kind.rfind("pair-", 0) != 0) throw ConfigError("model file: not a pair regressor");
  PairRegressor r;
  r.kind = pair_kind_from_string(kind.substr(5));
  try {
    r.recipient_dim = j.at("recipient_dim").get<std::size_t>();
    r.donor_dim = j.at("donor_dim").get<std::size_t>();
    if (j.contains("normalization") && !j["normalization"].is_null()) {
      r.normalization = model::normalization_from_json(j["normalization"]);
    }
    switch (r.kind) {
      case PairKind::reg_tree:
        r.model = RegressionTree::from_json(j.at("tree"));
        break;
      case PairKind::reg_nn:
        r.model = NeuralRegressor{model::net_from_json(j.at("net")), j.at("y_shift").get<double>(),
                                  j.at("y_scale").get<double>()};
        break;
      default:
        r.model = LinearModel::from_json(j.at("linear"));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("pair regressor: ") + e.what());
  }
  return r;
}

PairRegressor fit_pair_regressor(const data::Dataset& dataset, PairKind kind,
                                 const PairRegressorOptions& o) {
  if (dataset.empty()) throw InsufficientDataError("pair regressor: empty training set");
  const Matrix x = concat_features(dataset.recipient_matrix(), dataset.donor_matrix());
  const std::vector<double> y = dataset.outcomes();
  PairRegressor r;
  r.kind = kind;
  r.recipient_dim = dataset.schema().recipient_dim();
  r.donor_dim = dataset.schema().donor_dim();
  r.normalization = dataset.normalization();
  switch (kind) {
    case PairKind::ridge: {
      auto fit = fit_ridge(x, y, o.ridge_penalty);
      r.model = std::move(fit.model);
      r.warnings = std::move(fit.warnings);
      break;
    }
    case PairKind::lasso:
    case PairKind::elasticnet: {
      ElasticNetOptions eo;
      eo.lambda = kind == PairKind::lasso ? o.lasso_lambda : o.elasticnet_lambda;
      eo.l1_ratio = kind == PairKind::lasso ? 1.0 : o.elasticnet_l1_ratio;
      auto fit = fit_elastic_net(x, y, eo);
      if (!fit.converged) {
        r.warnings.push_back(to_string(kind) + ": coordinate descent stopped with duality gap " +
                             std::to_string(fit.duality_gap));
      }
      r.model = std::move(fit.model);
      break;
    }
    case PairKind::reg_tree:
      r.model = RegressionTree::fit(x, y, o.tree);
      break;
    case PairKind::reg_nn:
      r.model = fit_neural(x, y, o);
      break;
  }
  return r;
}

double predict_pair(const PairRegressor& regressor, std::span<const double> x_r,
                    std::span<const double> x_o) {
  return regressor.predict(x_r, x_o);
}

}  // namespace matchrep::baselines
