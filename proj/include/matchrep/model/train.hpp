#pragma once
#include <string>
#include <vector>

#include "matchrep/data/dataset.hpp"
#include "matchrep/error.hpp"
#include "matchrep/model/matchrep_model.hpp"

namespace matchrep::model {

struct EpochLog {
  std::size_t epoch = 0;
  double l_f = 0.0;    // mean squared error on the training outcome scale
  double l_dec = 0.0;  // summed over each batch, averaged over batches
  double l_phi = 0.0;
  double total = 0.0;  // l_f + alpha * l_dec + beta * l_phi
};

struct TrainingLog {
  std::vector<double> pretrain_loss;  // reconstruction MSE per pretrain epoch
  std::vector<EpochLog> epochs;
  std::size_t rep_skipped_batches = 0;
  std::size_t clamped_probabilities = 0;
  std::vector<std::string> events;  // cluster fusions and other notices
  std::size_t donor_map_frozen_epoch = 0;  // 0 if it trained to the end
};

struct TrainResult {
  MatchRepModel model;
  TrainingLog log;
};

// Raised when a loss or gradient turns non-finite; carries the parameters
// from the start of the failing epoch.
class TrainingDiverged : public DivergenceError {
 public:
  TrainingDiverged(const std::string& what, MatchRepModel checkpoint, TrainingLog log)
      : DivergenceError(what), checkpoint_(std::move(checkpoint)), log_(std::move(log)) {}
  const MatchRepModel& checkpoint() const noexcept { return checkpoint_; }
  const TrainingLog& log() const noexcept { return log_; }

 private:
  MatchRepModel checkpoint_;
  TrainingLog log_;
};

struct AutoencoderLoss {
  double value = 0.0;  // mean squared reconstruction error over all entries
  // Encoder blocks followed by decoder blocks (W0, b0, W1, b1, ...).
  std::vector<std::vector<double>> grads;
};
AutoencoderLoss autoencoder_loss(const DonorTypeMap& map, const num::Matrix& donors);

// Minimizes reconstruction error of the donor autoencoder; returns the
// per-epoch mean loss.
std::vector<double> pretrain_autoencoder(DonorTypeMap& map, const num::Matrix& donors,
                                         const TrainConfig& config, num::RngStream& rng);

// Sets map.centers from the encoded donors: k-means centers or k distinct
// randomly chosen embeddings.
void init_centers(DonorTypeMap& map, const num::Matrix& donors, std::size_t k, CenterInit mode,
                  num::RngStream& rng);

// Joint objective on one batch with gradients for every trainable block.
struct CombinedLoss {
  double l_f = 0.0;
  double l_dec = 0.0;
  double l_phi = 0.0;
  double total = 0.0;
  bool rep_skipped = false;
  std::size_t clamped = 0;
  std::vector<std::vector<double>> grads;  // parallel to trainable_blocks()
};

// `outcomes` are on the internal scale; `target` holds the batch rows of P
// over the live clusters (DonorTypeMap::roots order).
// With update_donor_map false the DEC term is still evaluated but produces
// no gradients.
CombinedLoss combined_loss(const MatchRepModel& model, const num::Matrix& recipients,
                           const num::Matrix& donors, const std::vector<double>& outcomes,
                           const num::Matrix& target, bool update_donor_map = true);

// Full pipeline: pretrain, initialize centers, then minibatch Adam on
// L_f + alpha * L_DEC + beta * L_Phi. Uses every record of `train`.
TrainResult train_joint(const data::Dataset& train, const TrainConfig& config);

// Clustering-only DEC: autoencoder pretraining, center initialization and
// minibatch Adam on L_DEC alone, with the same convergence rule as joint
// training. Returns the donor map and the per-epoch DEC loss.
struct DecResult {
  DonorTypeMap map;
  std::vector<double> pretrain_loss;
  std::vector<double> dec_loss;
};
DecResult train_dec(const num::Matrix& donors, const TrainConfig& config);

// Predictor-only training against fixed cluster labels: the donor map is
// untouched and only Phi, trunk and heads are fitted. Used by decoupled
// baselines. `model` must come from MatchRepModel::initialize.
TrainingLog train_with_frozen_labels(MatchRepModel& model, const num::Matrix& recipients,
                                     const std::vector<double>& outcomes,
                                     const std::vector<std::size_t>& labels);

}  // namespace matchrep::model
