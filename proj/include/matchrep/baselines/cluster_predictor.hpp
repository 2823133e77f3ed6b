#pragma once
// Decoupled baselines: donors are clustered first (k-means, EM or DEC alone)
// and the labels are frozen; a predictor is then fitted per cluster. The
// clustering never sees outcomes.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "matchrep/baselines/linear.hpp"
#include "matchrep/data/dataset.hpp"
#include "matchrep/model/matchrep_model.hpp"
#include "matchrep/numkit/gaussian.hpp"
#include "matchrep/numkit/matrix.hpp"

namespace matchrep::baselines {

enum class Clusterer { kmeans, em, dec_standalone };
enum class HeadPredictor { linear_per_head, multihead_nn };

std::string to_string(Clusterer c);
std::string to_string(HeadPredictor p);
Clusterer clusterer_from_string(const std::string& name);
HeadPredictor head_predictor_from_string(const std::string& name);

struct ClusterPredictorSpec {
  Clusterer clusterer = Clusterer::kmeans;
  HeadPredictor predictor = HeadPredictor::multihead_nn;
  // Adds beta * L_Phi (grouped by the frozen labels) to NN training.
  bool with_rep = false;
  // Network shapes, K, epochs, beta and seed; alpha is unused.
  model::TrainConfig train;
  double ridge_penalty = 1e-3;

  // e.g. "kmeans-nn-rep", "em-linear"
  std::string name() const;
  static ClusterPredictorSpec from_name(const std::string& name, const model::TrainConfig& train);
};

class ClusterPredictorBaseline {
 public:
  ClusterPredictorSpec spec;
  // Clusterer state; only the member matching spec.clusterer is populated.
  num::Matrix kmeans_centers;
  std::vector<double> em_weights;
  std::vector<num::DiagGaussian> em_components;
  std::optional<model::DonorTypeMap> dec_map;
  // Predictor state.
  std::vector<LinearModel> linear_heads;
  std::optional<model::MatchRepModel> nn;
  // Feature statistics of the training data, applied by callers to raw input.
  std::optional<data::Normalization> normalization;
  std::vector<std::string> warnings;

  std::size_t k() const noexcept { return spec.train.k; }
  std::vector<std::size_t> assign(const num::Matrix& donors) const;
  std::size_t donor_type(std::span<const double> x_o) const;
  // n x K potential outcomes in days.
  num::Matrix predict_potentials(const num::Matrix& recipients) const;
  std::vector<double> predict_potential(std::span<const double> x_r) const;

  nlohmann::json to_json() const;  // full envelope, kind "cluster-predictor"
  static ClusterPredictorBaseline from_json(const nlohmann::json& j);
};

// Fits the clusterer on donor features, freezes its labels, then fits the
// predictor. An empty cluster's head predicts the global outcome mean.
ClusterPredictorBaseline fit_cluster_predictor(const data::Dataset& train,
                                               const ClusterPredictorSpec& spec);

}  // namespace matchrep::baselines
