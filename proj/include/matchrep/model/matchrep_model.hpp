#pragma once
// The matching-representation model: a donor-type map T (autoencoder
// embedding plus K cluster centers), a recipient encoder Phi and a K-headed
// outcome predictor f. Predictions are f_k(Phi(x_r)) for every donor type k.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "matchrep/data/dataset.hpp"
#include "matchrep/model/losses.hpp"
#include "matchrep/numkit/dense_net.hpp"
#include "matchrep/numkit/rng.hpp"

namespace matchrep::model {

enum class CenterInit { kmeans, random };

struct TrainConfig {
  std::size_t k = 3;
  double alpha = 0.1;
  double beta = 1.0;
  double learning_rate = 1e-3;
  std::size_t batch_size = 128;
  std::size_t pretrain_epochs = 50;
  std::size_t joint_epochs = 200;
  std::size_t rep_dim = 8;    // d'
  std::size_t embed_dim = 8;  // donor embedding width
  std::vector<std::size_t> hidden = {32, 32};
  std::size_t trunk_width = 32;
  std::size_t head_width = 32;
  double dec_exponent = -0.5;
  CenterInit center_init = CenterInit::kmeans;
  std::size_t target_update_interval = 1;  // epochs between target refreshes
  // The donor map stops updating once fewer than this fraction of training
  // donors change cluster between target refreshes (0 keeps it training).
  double dec_tolerance = 1e-3;
  std::size_t min_cluster_count = 8;
  KlDirection kl_direction = KlDirection::conditional_to_marginal;
  bool standardize_outcomes = true;
  // Clusters whose heads differ by a near-constant shift are fused once the
  // interaction ratio falls below merge_tolerance (0 disables fusing).
  double merge_tolerance = 0.25;
  std::size_t merge_start_epoch = 50;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct DonorTypeMap {
  num::DenseNet encoder;  // d_o -> embed_dim
  num::DenseNet decoder;  // embed_dim -> d_o
  num::Matrix centers;    // K x embed_dim
  // alias[j] is the cluster j was fused into (alias[j] == j for live roots).
  std::vector<std::size_t> alias;

  std::size_t root(std::size_t j) const;
  // Indices of live (unfused) clusters, ascending, and their centers.
  std::vector<std::size_t> roots() const;
  num::Matrix root_centers() const;
};

struct MatchEncoder {
  num::DenseNet net;  // d_r -> d'
};

struct MultiHeadPredictor {
  num::DenseNet trunk;               // d' -> trunk_width
  std::vector<num::DenseNet> heads;  // trunk_width -> 1, one per donor type
};

class MatchRepModel {
 public:
  DonorTypeMap donor_map;
  MatchEncoder encoder;
  MultiHeadPredictor predictor;
  TrainConfig config;
  double y_shift = 0.0;
  double y_scale = 1.0;
  std::optional<data::Normalization> normalization;
  bool trained = false;

  // Random initialization for the given feature widths.
  static MatchRepModel initialize(std::size_t d_r, std::size_t d_o, const TrainConfig& config,
                                  num::RngStream& rng);

  std::size_t k() const noexcept { return donor_map.centers.rows(); }
  std::size_t recipient_dim() const { return encoder.net.input_dim(); }
  std::size_t donor_dim() const { return donor_map.encoder.input_dim(); }

  num::Matrix embed_donors(const num::Matrix& donors) const;
  // n x K; fused clusters get zero mass, live clusters share it.
  num::Matrix soft_assignment(const num::Matrix& donors) const;
  std::vector<std::size_t> donor_types(const num::Matrix& donors) const;
  num::Matrix represent(const num::Matrix& recipients) const;
  // Head outputs on the internal (standardized) outcome scale.
  num::Matrix head_outputs(const num::Matrix& recipients) const;
  // n x K potential outcomes in days.
  num::Matrix predict_potentials(const num::Matrix& recipients) const;

  // Parameters updated by joint training, in a fixed order: donor encoder,
  // centers, Phi, trunk, heads.
  std::vector<std::span<double>> trainable_blocks();
  std::vector<std::string> trainable_block_names() const;
  std::vector<std::size_t> trainable_block_sizes() const;

  friend bool operator==(const MatchRepModel&, const MatchRepModel&);
};

std::vector<double> predict_potential(const MatchRepModel& model, std::span<const double> x_r);

struct DonorAssignment {
  std::size_t type = 0;  // 0-based
  std::vector<double> soft;
};
DonorAssignment donor_type(const MatchRepModel& model, std::span<const double> x_o);

double compatibility(const MatchRepModel& model, std::span<const double> x_r,
                     std::span<const double> x_o);

// Per-cluster Gaussian KL of Phi(x_r) grouped by the model's donor types.
double representation_divergence(const MatchRepModel& model, const num::Matrix& recipients,
                                 const num::Matrix& donors);

}  // namespace matchrep::model
