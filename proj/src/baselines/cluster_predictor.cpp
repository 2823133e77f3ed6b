#include "matchrep/baselines/cluster_predictor.hpp"

#include <cmath>
#include <numeric>

#include "matchrep/error.hpp"
#include "matchrep/model/losses.hpp"
#include "matchrep/model/serialize.hpp"
#include "matchrep/model/train.hpp"
#include "matchrep/numkit/gmm.hpp"
#include "matchrep/numkit/kmeans.hpp"

namespace matchrep::baselines {

using num::Matrix;
using nlohmann::json;

std::string to_string(Clusterer c) {
  switch (c) {
    case Clusterer::kmeans: return "kmeans";
    case Clusterer::em: return "em";
    case Clusterer::dec_standalone: return "dec";
  }
  return "";
}

std::string to_string(HeadPredictor p) {
  return p == HeadPredictor::linear_per_head ? "linear" : "nn";
}

Clusterer clusterer_from_string(const std::string& name) {
  if (name == "kmeans") return Clusterer::kmeans;
  if (name == "em") return Clusterer::em;
  if (name == "dec" || name == "dec-standalone") return Clusterer::dec_standalone;
  throw ConfigError("unknown clusterer '" + name + "' (expected kmeans, em or dec)");
}

HeadPredictor head_predictor_from_string(const std::string& name) {
  if (name == "linear" || name == "linear-per-head") return HeadPredictor::linear_per_head;
  if (name == "nn" || name == "multihead-nn") return HeadPredictor::multihead_nn;
  throw ConfigError("unknown predictor '" + name + "' (expected linear or nn)");
}

std::string ClusterPredictorSpec::name() const {
  std::string s = to_string(clusterer) + "-" + to_string(predictor);
  if (with_rep) s += "-rep";
  return s;
}

ClusterPredictorSpec ClusterPredictorSpec::from_name(const std::string& name,
                                                     const model::TrainConfig& train) {
  ClusterPredictorSpec spec;
  spec.train = train;
  const auto dash = name.find('-');
  if (dash == std::string::npos) throw ConfigError("baseline name '" + name + "' lacks a predictor");
  spec.clusterer = clusterer_from_string(name.substr(0, dash));
  std::string rest = name.substr(dash + 1);
  if (rest.size() > 4 && rest.ends_with("-rep")) {
    spec.with_rep = true;
    rest.resize(rest.size() - 4);
  }
  spec.predictor = head_predictor_from_string(rest);
  if (spec.with_rep && spec.predictor != HeadPredictor::multihead_nn) {
    throw ConfigError("baseline '" + name + "': the representation loss needs the nn predictor");
  }
  return spec;
}

std::vector<std::size_t> ClusterPredictorBaseline::assign(const Matrix& donors) const {
  switch (spec.clusterer) {
    case Clusterer::kmeans:
      return num::nearest_center(donors, kmeans_centers);
    case Clusterer::em: {
      num::GmmResult g;
      g.weights = em_weights;
      g.components = em_components;
      std::vector<std::size_t> labels(donors.rows());
      for (std::size_t i = 0; i < donors.rows(); ++i) {
        const auto post = g.posterior(donors.row(i));
        labels[i] = static_cast<std::size_t>(
            std::distance(post.begin(), std::max_element(post.begin(), post.end())));
      }
      return labels;
    }
    case Clusterer::dec_standalone:
      return model::argmax_rows(model::soft_assign(num::mlp_predict(dec_map->encoder, donors),
                                                   dec_map->centers, spec.train.dec_exponent));
  }
  return {};
}

std::size_t ClusterPredictorBaseline::donor_type(std::span<const double> x_o) const {
  Matrix row(1, x_o.size());
  std::copy(x_o.begin(), x_o.end(), row.row(0).begin());
  return assign(row)[0];
}

Matrix ClusterPredictorBaseline::predict_potentials(const Matrix& recipients) const {
  if (spec.predictor == HeadPredictor::multihead_nn) return nn->predict_potentials(recipients);
  Matrix out(recipients.rows(), k());
  for (std::size_t j = 0; j < k(); ++j) {
    const auto col = linear_heads[j].predict(recipients);
    for (std::size_t i = 0; i < col.size(); ++i) out(i, j) = col[i];
  }
  return out;
}

std::vector<double> ClusterPredictorBaseline::predict_potential(std::span<const double> x_r) const {
  Matrix row(1, x_r.size());
  std::copy(x_r.begin(), x_r.end(), row.row(0).begin());
  const Matrix p = predict_potentials(row);
  return {p.row(0).begin(), p.row(0).end()};
}

json ClusterPredictorBaseline::to_json() const {
  json j = model::make_envelope("cluster-predictor");
  j["name"] = spec.name();
  j["train"] = spec.train.to_json();
  j["ridge_penalty"] = spec.ridge_penalty;
  j["normalization"] =
      normalization ? model::normalization_to_json(*normalization) : json(nullptr);
  switch (spec.clusterer) {
    case Clusterer::kmeans:
      j["kmeans_centers"] = model::matrix_to_json(kmeans_centers);
      break;
    case Clusterer::em: {
      json comps = json::array();
      for (const auto& c : em_components) comps.push_back({{"mean", c.mean}, {"var", c.var}});
      j["em"] = {{"weights", em_weights}, {"components", std::move(comps)}};
      break;
    }
    case Clusterer::dec_standalone:
      j["dec"] = {{"encoder", model::net_to_json(dec_map->encoder)},
                  {"centers", model::matrix_to_json(dec_map->centers)}};
      break;
  }
  if (spec.predictor == HeadPredictor::linear_per_head) {
    json heads = json::array();
    for (const auto& h : linear_heads) heads.push_back(h.to_json());
    j["linear_heads"] = std::move(heads);
  } else {
    j["nn"] = model::model_to_json(*nn);
  }
  return j;
}

ClusterPredictorBaseline ClusterPredictorBaseline::from_json(const json& j) {
  model::check_envelope(j, "cluster-predictor");
  try {
    ClusterPredictorBaseline b;
    b.spec = ClusterPredictorSpec::from_name(j.at("name").get<std::string>(),
                                             model::TrainConfig::from_json(j.at("train")));
    b.spec.ridge_penalty = j.at("ridge_penalty").get<double>();
    if (j.contains("normalization") && !j["normalization"].is_null()) {
      b.normalization = model::normalization_from_json(j["normalization"]);
    }
    switch (b.spec.clusterer) {
      case Clusterer::kmeans:
        b.kmeans_centers = model::matrix_from_json(j.at("kmeans_centers"));
        break;
      case Clusterer::em:
        b.em_weights = j.at("em").at("weights").get<std::vector<double>>();
        for (const auto& c : j.at("em").at("components")) {
          b.em_components.push_back(
              {c.at("mean").get<std::vector<double>>(), c.at("var").get<std::vector<double>>()});
        }
        break;
      case Clusterer::dec_standalone: {
        model::DonorTypeMap map;
        map.encoder = model::net_from_json(j.at("dec").at("encoder"));
        map.centers = model::matrix_from_json(j.at("dec").at("centers"));
        map.alias.resize(map.centers.rows());
        std::iota(map.alias.begin(), map.alias.end(), std::size_t{0});
        b.dec_map = std::move(map);
        break;
      }
    }
    if (b.spec.predictor == HeadPredictor::linear_per_head) {
      for (const auto& h : j.at("linear_heads")) b.linear_heads.push_back(LinearModel::from_json(h));
      if (b.linear_heads.size() != b.k()) throw ConfigError("cluster predictor: head count != K");
    } else {
      b.nn = model::model_from_json(j.at("nn"));
    }
    return b;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("cluster predictor: ") + e.what());
  }
}

ClusterPredictorBaseline fit_cluster_predictor(const data::Dataset& train,
                                               const ClusterPredictorSpec& spec) {
  spec.train.validate();
  if (spec.with_rep && spec.predictor != HeadPredictor::multihead_nn) {
    throw ConfigError("the representation loss needs the nn predictor");
  }
  const std::size_t k = spec.train.k;
  if (train.size() < std::max<std::size_t>(k, 2)) {
    throw InsufficientDataError("cluster predictor: fewer records than clusters");
  }
  ClusterPredictorBaseline b;
  b.spec = spec;
  b.normalization = train.normalization();
  const Matrix xr = train.recipient_matrix();
  const Matrix xo = train.donor_matrix();
  const std::vector<double> y = train.outcomes();
  // Every baseline sharing a clusterer sees identical labels.
  num::RngStream root = num::RngStream(spec.train.seed).split("baseline-" + to_string(spec.clusterer));

  switch (spec.clusterer) {
    case Clusterer::kmeans: {
      num::RngStream rng = root.split("kmeans");
      b.kmeans_centers = num::kmeans_fit(xo, k, rng).centers;
      break;
    }
    case Clusterer::em: {
      num::RngStream rng = root.split("em");
      auto g = num::gmm_em_fit(xo, k, rng);
      b.em_weights = std::move(g.weights);
      b.em_components = std::move(g.components);
      for (auto& w : g.warnings) b.warnings.push_back("em: " + w);
      break;
    }
    case Clusterer::dec_standalone:
      b.dec_map = model::train_dec(xo, spec.train).map;
      break;
  }
  const auto labels = b.assign(xo);
  std::vector<std::size_t> counts(k, 0);
  for (auto l : labels) ++counts[l];
  const double global_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

  if (spec.predictor == HeadPredictor::linear_per_head) {
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] == 0) {
        b.warnings.push_back("cluster " + std::to_string(j + 1) +
                             " is empty; its head predicts the global mean");
        b.linear_heads.push_back({std::vector<double>(xr.cols(), 0.0), global_mean});
        continue;
      }
      std::vector<std::size_t> rows;
      std::vector<double> yj;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == j) rows.push_back(i), yj.push_back(y[i]);
      }
      auto fit = fit_ridge(num::select_rows(xr, rows), yj, spec.ridge_penalty);
      for (auto& w : fit.warnings) b.warnings.push_back("cluster " + std::to_string(j + 1) + ": " + w);
      b.linear_heads.push_back(std::move(fit.model));
    }
    return b;
  }

  model::TrainConfig cfg = spec.train;
  if (!spec.with_rep) cfg.beta = 0.0;
  num::RngStream init = root.split("nn-init-" + spec.name());
  b.nn = model::MatchRepModel::initialize(xr.cols(), xo.cols(), cfg, init);
  b.nn->normalization = train.normalization();
  model::train_with_frozen_labels(*b.nn, xr, y, labels);
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] > 0) continue;
    b.warnings.push_back("cluster " + std::to_string(j + 1) +
                         " is empty; its head predicts the global mean");
    auto& last = b.nn->predictor.heads[j].layers().back();
    std::fill(last.weight.data().begin(), last.weight.data().end(), 0.0);
    last.bias.assign(last.bias.size(), (global_mean - b.nn->y_shift) / b.nn->y_scale);
  }
  return b;
}

}  // namespace matchrep::baselines
