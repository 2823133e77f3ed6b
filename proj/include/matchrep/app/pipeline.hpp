#pragma once
// Glue shared by the command-line tool and the acceptance suite: loading any
// saved model, evaluating it on a dataset and turning it into an allocation
// scorer.

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "matchrep/baselines/cluster_predictor.hpp"
#include "matchrep/baselines/pair_regressor.hpp"
#include "matchrep/data/dataset.hpp"
#include "matchrep/metrics/metrics.hpp"
#include "matchrep/model/matchrep_model.hpp"
#include "matchrep/sim/allocsim.hpp"

namespace matchrep::app {

struct AnyModel {
  std::string name;
  std::variant<model::MatchRepModel, baselines::ClusterPredictorBaseline, baselines::PairRegressor>
      model;

  const std::optional<data::Normalization>& normalization() const;
  // Donor-type models predict a potential outcome per learned cluster; pair
  // regressors only score concrete pairs.
  bool has_donor_types() const;

  nlohmann::json to_json() const;
  static AnyModel from_json(const nlohmann::json& j, std::string name);
};

AnyModel load_any_model(const std::filesystem::path& path);

// Applies the model's feature statistics to raw records (no-op without any).
data::Dataset prepare_features(const data::Dataset& raw,
                               const std::optional<data::Normalization>& normalization);

struct TypedPredictions {
  num::Matrix potentials;                // n x K, days
  std::vector<std::size_t> donor_types;  // learned cluster per record's donor
  std::vector<std::size_t> alias;        // fused cluster -> live cluster
};
// For donor-type models, on features already prepared for the model.
TypedPredictions predict_typed(const AnyModel& m, const data::Dataset& prepared);

// Factual error for every model; potential-outcome metrics for donor-type
// models on datasets with ground truth, with the true potentials projected
// onto the learned clusters.
metrics::EvalReport evaluate(const AnyModel& m, const data::Dataset& raw);

// Ground-truth donor-type labels of the coarse split {type 1} vs the rest.
std::vector<std::size_t> coarse_truth(const data::Dataset& dataset);

// Scorer over the records of `raw`: recipients and donors are addressed by
// record index.
sim::Scorer make_scorer(const AnyModel& m, const data::Dataset& raw);

struct PolicyRequest {
  sim::Policy policy;
  // Model consulted by the policy (ignored by real and plain fcfs).
  std::optional<std::string> scorer;
  std::string label;  // row label in reports
};

// Parses "uf", "guided-uf:matchrep", "bf:reg-nn"; the part after ':' names
// the scoring model, defaulting to `default_scorer` for scored policies.
PolicyRequest parse_policy_request(const std::string& text, const std::string& default_scorer,
                                   const std::string& guided_default);

// Runs every request on one shared stream. Rows other than the real policy
// carry the flipped ratio relative to the real replay (recipient type 1,
// donor type 1), which is always simulated.
std::vector<sim::SimReport> simulate_policies(
    const data::Dataset& raw, const sim::StreamConfig& stream_config, std::uint64_t stream_seed,
    const std::vector<PolicyRequest>& requests, const std::vector<AnyModel>& models);

}  // namespace matchrep::app
