#include "matchrep/model/matchrep_model.hpp"

#include <cmath>

#include "matchrep/error.hpp"

namespace matchrep::model {

using num::Activation;
using num::DenseNet;
using num::Matrix;

namespace {

std::string to_string(CenterInit c) { return c == CenterInit::kmeans ? "kmeans" : "random"; }

CenterInit center_init_from(const std::string& s) {
  if (s == "kmeans") return CenterInit::kmeans;
  if (s == "random") return CenterInit::random;
  throw ConfigError("center_init must be 'kmeans' or 'random', got '" + s + "'");
}

std::string to_string(KlDirection d) {
  return d == KlDirection::conditional_to_marginal ? "conditional_to_marginal"
                                                   : "marginal_to_conditional";
}

KlDirection kl_direction_from(const std::string& s) {
  if (s == "conditional_to_marginal") return KlDirection::conditional_to_marginal;
  if (s == "marginal_to_conditional") return KlDirection::marginal_to_conditional;
  throw ConfigError("kl_direction must be 'conditional_to_marginal' or 'marginal_to_conditional'");
}

std::vector<std::size_t> chain(std::size_t in, const std::vector<std::size_t>& hidden,
                               std::size_t out) {
  std::vector<std::size_t> dims{in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

void require_trained(const MatchRepModel& m) {
  if (!m.trained) throw UsageError("model has not been trained");
}

Matrix single_row(std::span<const double> x) {
  return Matrix(1, x.size(), std::vector<double>(x.begin(), x.end()));
}

}  // namespace

void TrainConfig::validate() const {
  if (k < 2) throw ConfigError("K must be at least 2");
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ConfigError("alpha and beta must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (batch_size < 2) throw ConfigError("batch_size must be at least 2");
  if (rep_dim == 0 || embed_dim == 0 || trunk_width == 0 || head_width == 0) {
    throw ConfigError("layer widths must be positive");
  }
  for (auto h : hidden) {
    if (h == 0) throw ConfigError("hidden widths must be positive");
  }
  if (dec_exponent != -0.5 && dec_exponent != -1.0) {
    throw ConfigError("dec_exponent must be -0.5 or -1");
  }
  if (target_update_interval == 0) throw ConfigError("target_update_interval must be >= 1");
  if (!(merge_tolerance >= 0.0)) throw ConfigError("merge_tolerance must be >= 0");
  if (!(dec_tolerance >= 0.0 && dec_tolerance < 1.0)) {
    throw ConfigError("dec_tolerance must lie in [0, 1)");
  }
}

nlohmann::json TrainConfig::to_json() const {
  return {{"K", k},
          {"alpha", alpha},
          {"beta", beta},
          {"learning_rate", learning_rate},
          {"batch_size", batch_size},
          {"pretrain_epochs", pretrain_epochs},
          {"joint_epochs", joint_epochs},
          {"rep_dim", rep_dim},
          {"embed_dim", embed_dim},
          {"hidden", hidden},
          {"trunk_width", trunk_width},
          {"head_width", head_width},
          {"dec_exponent", dec_exponent},
          {"center_init", to_string(center_init)},
          {"target_update_interval", target_update_interval},
          {"dec_tolerance", dec_tolerance},
          {"min_cluster_count", min_cluster_count},
          {"kl_direction", to_string(kl_direction)},
          {"standardize_outcomes", standardize_outcomes},
          {"merge_tolerance", merge_tolerance},
          {"merge_start_epoch", merge_start_epoch},
          {"seed", seed}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "K") c.k = value.get<std::size_t>();
      else if (key == "alpha") c.alpha = value.get<double>();
      else if (key == "beta") c.beta = value.get<double>();
      else if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "pretrain_epochs") c.pretrain_epochs = value.get<std::size_t>();
      else if (key == "joint_epochs") c.joint_epochs = value.get<std::size_t>();
      else if (key == "rep_dim") c.rep_dim = value.get<std::size_t>();
      else if (key == "embed_dim") c.embed_dim = value.get<std::size_t>();
      else if (key == "hidden") c.hidden = value.get<std::vector<std::size_t>>();
      else if (key == "trunk_width") c.trunk_width = value.get<std::size_t>();
      else if (key == "head_width") c.head_width = value.get<std::size_t>();
      else if (key == "dec_exponent") c.dec_exponent = value.get<double>();
      else if (key == "center_init") c.center_init = center_init_from(value.get<std::string>());
      else if (key == "target_update_interval") c.target_update_interval = value.get<std::size_t>();
      else if (key == "dec_tolerance") c.dec_tolerance = value.get<double>();
      else if (key == "min_cluster_count") c.min_cluster_count = value.get<std::size_t>();
      else if (key == "kl_direction") c.kl_direction = kl_direction_from(value.get<std::string>());
      else if (key == "standardize_outcomes") c.standardize_outcomes = value.get<bool>();
      else if (key == "merge_tolerance") c.merge_tolerance = value.get<double>();
      else if (key == "merge_start_epoch") c.merge_start_epoch = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else throw ConfigError("unknown training option '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("training config: ") + e.what());
  }
  c.validate();
  return c;
}

std::size_t DonorTypeMap::root(std::size_t j) const {
  while (alias.at(j) != j) j = alias[j];
  return j;
}

std::vector<std::size_t> DonorTypeMap::roots() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < alias.size(); ++j) {
    if (alias[j] == j) out.push_back(j);
  }
  return out;
}

Matrix DonorTypeMap::root_centers() const {
  const auto r = roots();
  return num::select_rows(centers, r);
}

MatchRepModel MatchRepModel::initialize(std::size_t d_r, std::size_t d_o,
                                        const TrainConfig& config, num::RngStream& rng) {
  config.validate();
  MatchRepModel m;
  m.config = config;
  m.donor_map.encoder =
      DenseNet::build(chain(d_o, config.hidden, config.embed_dim), Activation::relu,
                      Activation::identity, rng);
  std::vector<std::size_t> reversed(config.hidden.rbegin(), config.hidden.rend());
  m.donor_map.decoder = DenseNet::build(chain(config.embed_dim, reversed, d_o), Activation::relu,
                                        Activation::identity, rng);
  m.donor_map.centers = Matrix(config.k, config.embed_dim);
  m.donor_map.alias.resize(config.k);
  for (std::size_t j = 0; j < config.k; ++j) m.donor_map.alias[j] = j;
  m.encoder.net = DenseNet::build(chain(d_r, config.hidden, config.rep_dim), Activation::relu,
                                  Activation::identity, rng);
  m.predictor.trunk =
      DenseNet::build({config.rep_dim, config.trunk_width}, Activation::relu, Activation::relu, rng);
  for (std::size_t j = 0; j < config.k; ++j) {
    m.predictor.heads.push_back(DenseNet::build({config.trunk_width, config.head_width, 1},
                                                Activation::relu, Activation::identity, rng));
  }
  return m;
}

Matrix MatchRepModel::embed_donors(const Matrix& donors) const {
  return num::mlp_predict(donor_map.encoder, donors);
}

Matrix MatchRepModel::soft_assignment(const Matrix& donors) const {
  const auto roots = donor_map.roots();
  const Matrix t = soft_assign(embed_donors(donors), donor_map.root_centers(), config.dec_exponent);
  Matrix out(donors.rows(), k());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t r = 0; r < roots.size(); ++r) out(i, roots[r]) = t(i, r);
  }
  return out;
}

std::vector<std::size_t> MatchRepModel::donor_types(const Matrix& donors) const {
  return argmax_rows(soft_assignment(donors));
}

Matrix MatchRepModel::represent(const Matrix& recipients) const {
  return num::mlp_predict(encoder.net, recipients);
}

Matrix MatchRepModel::head_outputs(const Matrix& recipients) const {
  const Matrix h = num::mlp_predict(predictor.trunk, represent(recipients));
  Matrix out(recipients.rows(), predictor.heads.size());
  for (std::size_t j = 0; j < predictor.heads.size(); ++j) {
    const Matrix col = num::mlp_predict(predictor.heads[donor_map.root(j)], h);
    for (std::size_t i = 0; i < out.rows(); ++i) out(i, j) = col(i, 0);
  }
  return out;
}

Matrix MatchRepModel::predict_potentials(const Matrix& recipients) const {
  require_trained(*this);
  Matrix out = head_outputs(recipients);
  for (double& v : out.data()) v = y_shift + y_scale * v;
  return out;
}

std::vector<std::span<double>> MatchRepModel::trainable_blocks() {
  std::vector<std::span<double>> blocks = donor_map.encoder.parameter_blocks();
  blocks.push_back(donor_map.centers.data());
  for (auto b : encoder.net.parameter_blocks()) blocks.push_back(b);
  for (auto b : predictor.trunk.parameter_blocks()) blocks.push_back(b);
  for (auto& h : predictor.heads) {
    for (auto b : h.parameter_blocks()) blocks.push_back(b);
  }
  return blocks;
}

std::vector<std::string> MatchRepModel::trainable_block_names() const {
  std::vector<std::string> names;
  auto add = [&](const std::string& prefix, const DenseNet& net) {
    for (std::size_t l = 0; l < net.depth(); ++l) {
      names.push_back(prefix + ".W" + std::to_string(l));
      names.push_back(prefix + ".b" + std::to_string(l));
    }
  };
  add("donor_encoder", donor_map.encoder);
  names.push_back("centers");
  add("phi", encoder.net);
  add("trunk", predictor.trunk);
  for (std::size_t j = 0; j < predictor.heads.size(); ++j) {
    add("head" + std::to_string(j + 1), predictor.heads[j]);
  }
  return names;
}

std::vector<std::size_t> MatchRepModel::trainable_block_sizes() const {
  std::vector<std::size_t> sizes;
  auto add = [&](const DenseNet& net) {
    for (const auto& l : net.layers()) {
      sizes.push_back(l.weight.size());
      sizes.push_back(l.bias.size());
    }
  };
  add(donor_map.encoder);
  sizes.push_back(donor_map.centers.size());
  add(encoder.net);
  add(predictor.trunk);
  for (const auto& h : predictor.heads) add(h);
  return sizes;
}

bool operator==(const MatchRepModel& a, const MatchRepModel& b) {
  return a.donor_map.encoder == b.donor_map.encoder && a.donor_map.decoder == b.donor_map.decoder &&
         a.donor_map.centers == b.donor_map.centers && a.donor_map.alias == b.donor_map.alias &&
         a.encoder.net == b.encoder.net && a.predictor.trunk == b.predictor.trunk &&
         a.predictor.heads == b.predictor.heads && a.config.to_json() == b.config.to_json() &&
         a.y_shift == b.y_shift && a.y_scale == b.y_scale && a.normalization == b.normalization &&
         a.trained == b.trained;
}

std::vector<double> predict_potential(const MatchRepModel& model, std::span<const double> x_r) {
  if (x_r.size() != model.recipient_dim()) {
    throw InvalidInputError("predict_potential: recipient has " + std::to_string(x_r.size()) +
                            " features, model expects " + std::to_string(model.recipient_dim()));
  }
  return model.predict_potentials(single_row(x_r)).values();
}

DonorAssignment donor_type(const MatchRepModel& model, std::span<const double> x_o) {
  require_trained(model);
  if (x_o.size() != model.donor_dim()) {
    throw InvalidInputError("donor_type: donor feature width mismatch");
  }
  DonorAssignment a;
  a.soft = model.soft_assignment(single_row(x_o)).values();
  std::size_t best = 0;
  for (std::size_t j = 1; j < a.soft.size(); ++j) {
    if (a.soft[j] > a.soft[best]) best = j;
  }
  a.type = best;
  return a;
}

double compatibility(const MatchRepModel& model, std::span<const double> x_r,
                     std::span<const double> x_o) {
  return predict_potential(model, x_r)[donor_type(model, x_o).type];
}

double representation_divergence(const MatchRepModel& model, const Matrix& recipients,
                                 const Matrix& donors) {
  if (recipients.rows() != donors.rows()) {
    throw InvalidInputError("representation_divergence: row counts differ");
  }
  const auto labels = model.donor_types(donors);
  return rep_loss(model.represent(recipients), labels, model.k(), model.config.min_cluster_count,
                  model.config.kl_direction)
      .value;
}

}  // namespace matchrep::model
