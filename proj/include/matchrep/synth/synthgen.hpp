#pragma once
// Gaussian-mixture generator for donor-recipient matches with a complete
// counterfactual oracle, and a surrogate outcome simulator for ingested
// tables that lack counterfactuals.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "matchrep/data/dataset.hpp"

namespace matchrep::synth {

struct GaussianComponent {
  std::vector<double> mean;
  std::vector<double> var;  // diagonal covariance
};

struct SyntheticConfig {
  std::size_t n = 5000;
  std::vector<double> recipient_type_weights;        // length M
  std::vector<std::vector<double>> match_table;      // M x K, P(k | m)
  std::vector<GaussianComponent> recipient_components;  // M
  std::vector<GaussianComponent> donor_components;      // K
  std::vector<std::vector<double>> outcome_means;    // M x K, days
  std::vector<std::vector<double>> outcome_vars;     // M x K, days^2
  std::vector<double> untreated_mean;                // M
  std::vector<double> untreated_var;                 // M
  double untreated_floor = 1.0;
  std::uint64_t seed = 0;

  std::size_t recipient_types() const noexcept { return recipient_type_weights.size(); }
  std::size_t donor_types() const noexcept { return donor_components.size(); }

  // Throws ConfigError describing the first violated constraint.
  void validate() const;

  nlohmann::json to_json() const;
  static SyntheticConfig from_json(const nlohmann::json& j);

  // Two recipient types, three donor types, n = 5000.
  static SyntheticConfig paper_preset();
  // Resolves a preset name ("paper-5.1"); throws ConfigError otherwise.
  static SyntheticConfig preset(const std::string& name);
};

// Draws config.n records in order; each record carries its full potential
// vector, untreated survival and both type labels. Feature names are
// r1..r{d_r} and o1..o{d_o}.
data::Dataset sample_dataset(const SyntheticConfig& config);

// Row m (0-based) of the outcome-mean table.
std::vector<double> true_potential_means(const SyntheticConfig& config, std::size_t m);

struct SemiSyntheticOptions {
  double scale = 500.0;          // days per unit of softplus response
  double noise_sd = 10.0;        // days; applied inside the softplus
  double weight_sd = 1.0;        // prior scale of per-type recipient weights
  double untreated_scale = 250.0;
};

// Clusters donors into k pseudo-types with k-means and replaces every
// outcome by a simulated potential vector
//   y[j] = scale * softplus(w_j . x_r + b_j + noise),
// with (w_j, b_j) drawn once from `seed`. Untreated survival follows the
// same construction with its own weights. Recipient types are left unset.
data::Dataset semi_synthetic_outcomes(const data::Dataset& dataset, std::size_t k,
                                      std::uint64_t seed, const SemiSyntheticOptions& options = {});

}  // namespace matchrep::synth
