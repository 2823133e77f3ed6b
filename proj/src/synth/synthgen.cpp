#include "matchrep/synth/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "matchrep/error.hpp"
#include "matchrep/numkit/kmeans.hpp"
#include "matchrep/numkit/rng.hpp"

namespace matchrep::synth {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("synthetic config: " + what);
}

void check_distribution(const std::vector<double>& p, const std::string& what) {
  double s = 0.0;
  for (double v : p) {
    require(std::isfinite(v) && v >= 0.0, what + " has a negative or non-finite entry");
    s += v;
  }
  require(std::abs(s - 1.0) <= 1e-9, what + " sums to " + std::to_string(s) + ", not 1");
}

std::vector<double> draw(const GaussianComponent& c, num::RngStream& rng) {
  std::vector<double> x(c.mean.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = rng.normal(c.mean[j], std::sqrt(c.var[j]));
  return x;
}

nlohmann::json component_json(const GaussianComponent& c) {
  return {{"mean", c.mean}, {"var", c.var}};
}

std::vector<GaussianComponent> components_from(const nlohmann::json& j) {
  std::vector<GaussianComponent> out;
  for (const auto& c : j) {
    out.push_back({c.at("mean").get<std::vector<double>>(), c.at("var").get<std::vector<double>>()});
  }
  return out;
}

std::vector<std::string> numbered(const std::string& prefix, std::size_t d) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < d; ++j) names.push_back(prefix + std::to_string(j + 1));
  return names;
}

double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }

}  // namespace

void SyntheticConfig::validate() const {
  const std::size_t m = recipient_types();
  const std::size_t k = donor_types();
  require(n >= 1, "n must be positive");
  require(m >= 1 && k >= 1, "need at least one recipient and one donor type");
  check_distribution(recipient_type_weights, "recipient_type_weights");
  require(match_table.size() == m, "match_table needs one row per recipient type");
  for (std::size_t r = 0; r < m; ++r) {
    require(match_table[r].size() == k, "match_table row width must equal donor type count");
    check_distribution(match_table[r], "match_table row " + std::to_string(r + 1));
  }
  require(recipient_components.size() == m, "one recipient component per recipient type");
  auto check_components = [&](const std::vector<GaussianComponent>& cs, const std::string& who) {
    const std::size_t d = cs.front().mean.size();
    require(d >= 1, who + " components need at least one dimension");
    for (const auto& c : cs) {
      require(c.mean.size() == d && c.var.size() == d, who + " components disagree on dimension");
      for (double v : c.var) require(v > 0.0 && std::isfinite(v), who + " variances must be > 0");
      for (double v : c.mean) require(std::isfinite(v), who + " means must be finite");
    }
  };
  check_components(recipient_components, "recipient");
  check_components(donor_components, "donor");
  require(outcome_means.size() == m && outcome_vars.size() == m,
          "outcome tables need one row per recipient type");
  for (std::size_t r = 0; r < m; ++r) {
    require(outcome_means[r].size() == k && outcome_vars[r].size() == k,
            "outcome table rows need one entry per donor type");
    for (double v : outcome_vars[r]) require(v > 0.0, "outcome variances must be > 0");
  }
  require(untreated_mean.size() == m && untreated_var.size() == m,
          "untreated parameters need one entry per recipient type");
  for (double v : untreated_var) require(v > 0.0, "untreated variances must be > 0");
}

nlohmann::json SyntheticConfig::to_json() const {
  nlohmann::json rc = nlohmann::json::array(), dc = nlohmann::json::array();
  for (const auto& c : recipient_components) rc.push_back(component_json(c));
  for (const auto& c : donor_components) dc.push_back(component_json(c));
  return {{"n", n},
          {"recipient_type_weights", recipient_type_weights},
          {"match_table", match_table},
          {"recipient_components", rc},
          {"donor_components", dc},
          {"outcome_means", outcome_means},
          {"outcome_vars", outcome_vars},
          {"untreated_mean", untreated_mean},
          {"untreated_var", untreated_var},
          {"untreated_floor", untreated_floor},
          {"seed", seed}};
}

SyntheticConfig SyntheticConfig::from_json(const nlohmann::json& j) {
  SyntheticConfig c = j.contains("preset") ? preset(j.at("preset").get<std::string>())
                                           : SyntheticConfig{};
  try {
    if (j.contains("n")) c.n = j.at("n").get<std::size_t>();
    if (j.contains("recipient_type_weights"))
      c.recipient_type_weights = j.at("recipient_type_weights").get<std::vector<double>>();
    if (j.contains("match_table"))
      c.match_table = j.at("match_table").get<std::vector<std::vector<double>>>();
    if (j.contains("recipient_components"))
      c.recipient_components = components_from(j.at("recipient_components"));
    if (j.contains("donor_components")) c.donor_components = components_from(j.at("donor_components"));
    if (j.contains("outcome_means"))
      c.outcome_means = j.at("outcome_means").get<std::vector<std::vector<double>>>();
    if (j.contains("outcome_vars"))
      c.outcome_vars = j.at("outcome_vars").get<std::vector<std::vector<double>>>();
    if (j.contains("untreated_mean")) c.untreated_mean = j.at("untreated_mean").get<std::vector<double>>();
    if (j.contains("untreated_var")) c.untreated_var = j.at("untreated_var").get<std::vector<double>>();
    if (j.contains("untreated_floor")) c.untreated_floor = j.at("untreated_floor").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic config: ") + e.what());
  }
  if (c.recipient_components.empty() || c.donor_components.empty()) {
    throw ConfigError("synthetic config: components missing (set them or name a preset)");
  }
  c.validate();
  return c;
}

SyntheticConfig SyntheticConfig::paper_preset() {
  SyntheticConfig c;
  c.n = 5000;
  c.recipient_type_weights = {0.5, 0.5};
  c.match_table = {{0.6, 0.2, 0.2}, {0.1, 0.7, 0.2}};
  c.recipient_components = {{{-2.0, 0.0}, {1.0, 1.0}}, {{2.0, 0.0}, {1.0, 1.0}}};
  c.donor_components = {
      {{-2.0, -2.0}, {1.0, 1.0}}, {{2.0, 2.0}, {1.0, 1.0}}, {{3.0, 1.0}, {1.0, 1.0}}};
  c.outcome_means = {{500.0, 1000.0, 1100.0}, {100.0, 800.0, 900.0}};
  c.outcome_vars = {{50.0, 100.0, 100.0}, {10.0, 100.0, 100.0}};
  c.untreated_mean = {400.0, 350.0};
  c.untreated_var = {2500.0, 2500.0};
  c.untreated_floor = 1.0;
  c.seed = 0;
  return c;
}

SyntheticConfig SyntheticConfig::preset(const std::string& name) {
  if (name == "paper-5.1") return paper_preset();
  throw ConfigError("unknown preset '" + name + "'");
}

data::Dataset sample_dataset(const SyntheticConfig& config) {
  config.validate();
  num::RngStream rng(num::derive_seed(config.seed, "synthgen"));
  std::vector<data::MatchRecord> records;
  records.reserve(config.n);
  const std::size_t k_count = config.donor_types();
  for (std::size_t i = 0; i < config.n; ++i) {
    data::MatchRecord r;
    const std::size_t m = rng.categorical(config.recipient_type_weights);
    r.recipient = draw(config.recipient_components[m], rng);
    const std::size_t k = rng.categorical(config.match_table[m]);
    r.donor = draw(config.donor_components[k], rng);
    std::vector<double> y(k_count);
    for (std::size_t j = 0; j < k_count; ++j) {
      y[j] = rng.normal(config.outcome_means[m][j], std::sqrt(config.outcome_vars[m][j]));
    }
    r.outcome = y[k];
    r.true_potentials = std::move(y);
    r.untreated_survival = std::max(
        config.untreated_floor, rng.normal(config.untreated_mean[m], std::sqrt(config.untreated_var[m])));
    r.true_recipient_type = static_cast<int>(m);
    r.true_donor_type = static_cast<int>(k);
    records.push_back(std::move(r));
  }
  data::Schema schema{numbered("r", config.recipient_components.front().mean.size()),
                      numbered("o", config.donor_components.front().mean.size())};
  return data::Dataset(std::move(schema), std::move(records));
}

std::vector<double> true_potential_means(const SyntheticConfig& config, std::size_t m) {
  if (m >= config.outcome_means.size()) {
    throw InvalidInputError("recipient type " + std::to_string(m + 1) + " out of range");
  }
  return config.outcome_means[m];
}

data::Dataset semi_synthetic_outcomes(const data::Dataset& dataset, std::size_t k,
                                      std::uint64_t seed, const SemiSyntheticOptions& options) {
  if (dataset.size() < k || k == 0) {
    throw InsufficientDataError("semi-synthetic model needs at least k records");
  }
  num::RngStream root(num::derive_seed(seed, "semi-synthetic"));
  num::RngStream cluster_rng = root.split("pseudo-types");
  const auto fit = num::kmeans_fit(dataset.donor_matrix(), k, cluster_rng);

  const std::size_t d = dataset.schema().recipient_dim();
  // Recipient features are standardized internally so the weight prior has a
  // fixed meaning regardless of the table's units.
  num::Matrix xr = dataset.recipient_matrix();
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < xr.rows(); ++i) mean += xr(i, c);
    mean /= static_cast<double>(xr.rows());
    for (std::size_t i = 0; i < xr.rows(); ++i) sq += (xr(i, c) - mean) * (xr(i, c) - mean);
    const double sd = std::sqrt(sq / static_cast<double>(xr.rows()));
    for (std::size_t i = 0; i < xr.rows(); ++i) xr(i, c) = sd > 0 ? (xr(i, c) - mean) / sd : 0.0;
  }

  num::RngStream weight_rng = root.split("weights");
  const double w_sd = options.weight_sd / std::sqrt(static_cast<double>(std::max<std::size_t>(d, 1)));
  std::vector<std::vector<double>> w(k + 1, std::vector<double>(d));
  std::vector<double> b(k + 1);
  for (std::size_t j = 0; j <= k; ++j) {
    for (auto& v : w[j]) v = weight_rng.normal(0.0, w_sd);
    b[j] = weight_rng.normal(0.5, 0.5);
  }

  num::RngStream noise_rng = root.split("noise");
  const double noise_scale = options.noise_sd / options.scale;
  std::vector<data::MatchRecord> records = dataset.records();
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto response = [&](std::size_t j) {
      double z = b[j];
      for (std::size_t c = 0; c < d; ++c) z += w[j][c] * xr(i, c);
      return z;
    };
    std::vector<double> y(k);
    for (std::size_t j = 0; j < k; ++j) {
      y[j] = options.scale * softplus(response(j) + noise_scale * noise_rng.normal());
    }
    auto& r = records[i];
    r.true_donor_type = static_cast<int>(fit.labels[i]);
    r.outcome = y[fit.labels[i]];
    r.true_potentials = std::move(y);
    r.untreated_survival = options.untreated_scale * softplus(response(k));
    r.true_recipient_type.reset();
  }
  data::Dataset out(dataset.schema(), std::move(records));
  if (dataset.normalization()) out.set_normalization(*dataset.normalization());
  return out;
}

}  // namespace matchrep::synth
