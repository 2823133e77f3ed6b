#include "matchrep/model/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "matchrep/numkit/adam.hpp"
#include "matchrep/numkit/kmeans.hpp"

namespace matchrep::model {

using num::Matrix;

namespace {

struct BlockLayout {
  std::size_t donor_encoder = 0;
  std::size_t centers = 0;
  std::size_t phi = 0;
  std::size_t trunk = 0;
  std::vector<std::size_t> heads;
  std::size_t count = 0;
};

BlockLayout layout_of(const MatchRepModel& m) {
  BlockLayout b;
  std::size_t at = 0;
  b.donor_encoder = at;
  at += 2 * m.donor_map.encoder.depth();
  b.centers = at++;
  b.phi = at;
  at += 2 * m.encoder.net.depth();
  b.trunk = at;
  at += 2 * m.predictor.trunk.depth();
  for (const auto& h : m.predictor.heads) {
    b.heads.push_back(at);
    at += 2 * h.depth();
  }
  b.count = at;
  return b;
}

std::vector<std::vector<double>> zero_grads(const MatchRepModel& m) {
  std::vector<std::vector<double>> g;
  for (auto size : m.trainable_block_sizes()) g.emplace_back(size, 0.0);
  return g;
}

void store(std::vector<std::vector<double>>& grads, std::size_t offset,
           const num::NetGradients& ng, double scale = 1.0) {
  const auto blocks = ng.blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto& dst = grads[offset + b];
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * blocks[b][i];
  }
}

bool finite(double v) { return std::isfinite(v); }

std::vector<std::size_t> iota_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

// L_f and L_Phi with gradients into Phi, trunk and heads.
struct PredictorLoss {
  double l_f = 0.0;
  double l_phi = 0.0;
  bool rep_skipped = false;
};

PredictorLoss predictor_loss(const MatchRepModel& m, const BlockLayout& layout,
                             const Matrix& recipients, const std::vector<double>& outcomes,
                             const std::vector<std::size_t>& labels, double beta,
                             std::vector<std::vector<double>>& grads) {
  const std::size_t k = m.predictor.heads.size();
  const auto phi_pass = num::mlp_forward(m.encoder.net, recipients);
  const Matrix& rep = phi_pass.output();
  const auto trunk_pass = num::mlp_forward(m.predictor.trunk, rep);
  const Matrix& h = trunk_pass.output();

  std::vector<num::ForwardPass> head_pass(k);
  std::vector<bool> used(k, false);
  for (auto l : labels) used[l] = true;
  Matrix pred(recipients.rows(), k);
  for (std::size_t j = 0; j < k; ++j) {
    if (!used[j]) continue;
    head_pass[j] = num::mlp_forward(m.predictor.heads[j], h);
    for (std::size_t i = 0; i < pred.rows(); ++i) pred(i, j) = head_pass[j].output()(i, 0);
  }
  PredictorLoss out;
  const FactualLoss fl = factual_loss(pred, outcomes, labels);
  out.l_f = fl.value;

  Matrix d_h(h.rows(), h.cols());
  for (std::size_t j = 0; j < k; ++j) {
    if (!used[j]) continue;
    Matrix up(pred.rows(), 1);
    for (std::size_t i = 0; i < pred.rows(); ++i) up(i, 0) = fl.d_pred(i, j);
    const auto g = num::mlp_backward(m.predictor.heads[j], head_pass[j], up);
    store(grads, layout.heads[j], g);
    for (std::size_t i = 0; i < d_h.size(); ++i) d_h.data()[i] += g.input.data()[i];
  }
  const auto tg = num::mlp_backward(m.predictor.trunk, trunk_pass, d_h);
  store(grads, layout.trunk, tg);

  Matrix d_rep = tg.input;
  const RepLoss rl =
      rep_loss(rep, labels, k, m.config.min_cluster_count, m.config.kl_direction);
  out.l_phi = rl.value;
  out.rep_skipped = rl.skipped;
  if (beta > 0.0 && !rl.skipped) {
    for (std::size_t i = 0; i < d_rep.size(); ++i) d_rep.data()[i] += beta * rl.d_rep.data()[i];
  }
  store(grads, layout.phi, num::mlp_backward(m.encoder.net, phi_pass, d_rep));
  return out;
}

void sync_tied_centers(DonorTypeMap& map) {
  for (std::size_t j = 0; j < map.alias.size(); ++j) {
    const std::size_t r = map.root(j);
    if (r == j) continue;
    for (std::size_t c = 0; c < map.centers.cols(); ++c) map.centers(j, c) = map.centers(r, c);
  }
}

std::vector<std::vector<std::size_t>> make_batches(std::vector<std::size_t>& order,
                                                   std::size_t batch_size, num::RngStream& rng) {
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    // A trailing batch of one row cannot support variance estimates; fold it in.
    if (end - start < 2 && !batches.empty()) {
      batches.back().insert(batches.back().end(), order.begin() + static_cast<long>(start),
                            order.begin() + static_cast<long>(end));
      break;
    }
    batches.emplace_back(order.begin() + static_cast<long>(start),
                         order.begin() + static_cast<long>(end));
  }
  return batches;
}

void adam_update(MatchRepModel& m, const std::vector<std::vector<double>>& grads,
                 num::AdamState& state, double lr) {
  auto params = m.trainable_blocks();
  std::vector<std::span<const double>> g(grads.begin(), grads.end());
  num::adam_step(params, g, state, lr);
}

void merge_clusters(DonorTypeMap& map, std::size_t keep, std::size_t drop,
                    const std::vector<std::size_t>& counts, MultiHeadPredictor& predictor) {
  const std::size_t root = std::min(keep, drop);
  const std::size_t other = std::max(keep, drop);
  const double nk = static_cast<double>(counts[keep]);
  const double nd = static_cast<double>(counts[drop]);
  std::vector<double> center(map.centers.cols());
  for (std::size_t c = 0; c < center.size(); ++c) {
    center[c] = nk + nd > 0 ? (nk * map.centers(keep, c) + nd * map.centers(drop, c)) / (nk + nd)
                            : map.centers(keep, c);
  }
  if (root != keep) predictor.heads[root] = predictor.heads[keep];
  for (std::size_t j = 0; j < map.alias.size(); ++j) {
    const std::size_t r = map.root(j);
    if (r == other || r == root) map.alias[j] = root;
  }
  map.alias[root] = root;
  for (std::size_t c = 0; c < center.size(); ++c) map.centers(root, c) = center[c];
  sync_tied_centers(map);
}

// Fuses dead clusters and, once allowed, the pair of live clusters whose
// heads differ by the most nearly constant shift.
void consider_merges(MatchRepModel& m, const Matrix& recipients, const Matrix& donors,
                     std::size_t epoch, TrainingLog& log) {
  auto& map = m.donor_map;
  const std::size_t k = m.k();
  std::vector<std::size_t> counts(k, 0);
  for (auto l : m.donor_types(donors)) ++counts[l];
  std::vector<std::size_t> roots;
  for (std::size_t j = 0; j < k; ++j) {
    if (map.root(j) == j) roots.push_back(j);
  }

  for (std::size_t idx = 0; idx < roots.size() && roots.size() > 2; ++idx) {
    const std::size_t dead = roots[idx];
    if (counts[dead] > 0) continue;
    std::size_t nearest = dead;
    double best = INFINITY;
    for (auto r : roots) {
      if (r == dead || counts[r] == 0) continue;
      const double d = num::squared_distance(map.centers.row(dead), map.centers.row(r));
      if (d < best) best = d, nearest = r;
    }
    if (nearest == dead) continue;
    merge_clusters(map, nearest, dead, counts, m.predictor);
    counts[std::min(nearest, dead)] = counts[nearest];
    log.events.push_back("epoch " + std::to_string(epoch) + ": empty cluster " +
                         std::to_string(dead + 1) + " fused into cluster " +
                         std::to_string(nearest + 1));
    roots.erase(roots.begin() + static_cast<long>(idx));
    roots.clear();
    for (std::size_t j = 0; j < k; ++j) {
      if (map.root(j) == j) roots.push_back(j);
    }
    idx = static_cast<std::size_t>(-1);
  }

  if (m.config.merge_tolerance <= 0.0 || epoch < m.config.merge_start_epoch || roots.size() <= 2) {
    return;
  }
  const Matrix f = m.head_outputs(recipients);
  const double n = static_cast<double>(f.rows());
  auto column_var = [&](std::size_t j) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < f.rows(); ++i) mean += f(i, j);
    mean /= n;
    for (std::size_t i = 0; i < f.rows(); ++i) sq += (f(i, j) - mean) * (f(i, j) - mean);
    return sq / n;
  };
  double best_ratio = INFINITY;
  std::size_t best_a = 0, best_b = 0;
  for (std::size_t x = 0; x < roots.size(); ++x) {
    for (std::size_t y = x + 1; y < roots.size(); ++y) {
      const std::size_t a = roots[x], b = roots[y];
      double mean = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < f.rows(); ++i) mean += f(i, a) - f(i, b);
      mean /= n;
      for (std::size_t i = 0; i < f.rows(); ++i) {
        const double d = f(i, a) - f(i, b) - mean;
        sq += d * d;
      }
      const double spread = std::sqrt(0.5 * (column_var(a) + column_var(b)));
      const double ratio = spread > 0.0 ? std::sqrt(sq / n) / spread : INFINITY;
      if (ratio < best_ratio) best_ratio = ratio, best_a = a, best_b = b;
    }
  }
  if (best_ratio < m.config.merge_tolerance) {
    const std::size_t keep = counts[best_a] >= counts[best_b] ? best_a : best_b;
    const std::size_t drop = keep == best_a ? best_b : best_a;
    merge_clusters(map, keep, drop, counts, m.predictor);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", best_ratio);
    log.events.push_back("epoch " + std::to_string(epoch) + ": clusters " +
                         std::to_string(best_a + 1) + " and " + std::to_string(best_b + 1) +
                         " fused (interaction ratio " + buf + ")");
  }
}

}  // namespace

AutoencoderLoss autoencoder_loss(const DonorTypeMap& map, const Matrix& donors) {
  const auto enc = num::mlp_forward(map.encoder, donors);
  const auto dec = num::mlp_forward(map.decoder, enc.output());
  Matrix up = dec.output();
  AutoencoderLoss out;
  const double scale = 1.0 / static_cast<double>(donors.size());
  for (std::size_t i = 0; i < up.size(); ++i) {
    const double r = up.data()[i] - donors.data()[i];
    out.value += r * r * scale;
    up.data()[i] = 2.0 * r * scale;
  }
  const auto gd = num::mlp_backward(map.decoder, dec, up);
  const auto ge = num::mlp_backward(map.encoder, enc, gd.input);
  for (auto b : ge.blocks()) out.grads.emplace_back(b.begin(), b.end());
  for (auto b : gd.blocks()) out.grads.emplace_back(b.begin(), b.end());
  return out;
}

std::vector<double> pretrain_autoencoder(DonorTypeMap& map, const Matrix& donors,
                                         const TrainConfig& config, num::RngStream& rng) {
  if (donors.rows() < 2) throw InsufficientDataError("autoencoder pretraining needs >= 2 donors");
  std::vector<std::size_t> sizes;
  for (auto b : map.encoder.parameter_blocks()) sizes.push_back(b.size());
  for (auto b : map.decoder.parameter_blocks()) sizes.push_back(b.size());
  num::AdamState state(sizes);
  std::vector<std::size_t> order = iota_n(donors.rows());
  std::vector<double> history;
  for (std::size_t epoch = 0; epoch < config.pretrain_epochs; ++epoch) {
    double total = 0.0;
    std::size_t rows = 0;
    for (const auto& batch : make_batches(order, config.batch_size, rng)) {
      const AutoencoderLoss loss = autoencoder_loss(map, num::select_rows(donors, batch));
      if (!finite(loss.value)) {
        throw DivergenceError("autoencoder loss is not finite; lower the learning rate");
      }
      auto params = map.encoder.parameter_blocks();
      for (auto b : map.decoder.parameter_blocks()) params.push_back(b);
      std::vector<std::span<const double>> grads(loss.grads.begin(), loss.grads.end());
      try {
        num::adam_step(params, grads, state, config.learning_rate);
      } catch (const DivergenceError&) {
        throw DivergenceError("autoencoder gradient is not finite; lower the learning rate");
      }
      total += loss.value * static_cast<double>(batch.size());
      rows += batch.size();
    }
    history.push_back(total / static_cast<double>(rows));
  }
  return history;
}

void init_centers(DonorTypeMap& map, const Matrix& donors, std::size_t k, CenterInit mode,
                  num::RngStream& rng) {
  const Matrix z = num::mlp_predict(map.encoder, donors);
  if (z.rows() < k) throw InsufficientDataError("fewer donors than clusters");
  if (mode == CenterInit::kmeans) {
    map.centers = num::kmeans_fit(z, k, rng).centers;
  } else {
    map.centers = Matrix(k, z.cols());
    std::vector<std::size_t> order = iota_n(z.rows());
    rng.shuffle(order);
    std::size_t filled = 0;
    for (std::size_t i = 0; i < order.size() && filled < k; ++i) {
      bool distinct = true;
      for (std::size_t j = 0; j < filled; ++j) {
        if (num::squared_distance(z.row(order[i]), map.centers.row(j)) == 0.0) distinct = false;
      }
      if (!distinct) continue;
      std::copy(z.row(order[i]).begin(), z.row(order[i]).end(), map.centers.row(filled).begin());
      ++filled;
    }
    if (filled < k) throw InsufficientDataError("fewer distinct donor embeddings than clusters");
  }
  map.alias.resize(k);
  std::iota(map.alias.begin(), map.alias.end(), std::size_t{0});
}

CombinedLoss combined_loss(const MatchRepModel& model, const Matrix& recipients,
                           const Matrix& donors, const std::vector<double>& outcomes,
                           const Matrix& target, bool update_donor_map) {
  const MatchRepModel& m = model;
  const BlockLayout layout = layout_of(m);
  CombinedLoss out;
  out.grads = zero_grads(m);

  const auto enc = num::mlp_forward(m.donor_map.encoder, donors);
  const auto roots = m.donor_map.roots();
  const Matrix centers = m.donor_map.root_centers();
  const DecLoss dl = dec_loss(enc.output(), centers, target, m.config.dec_exponent);
  out.l_dec = dl.value;
  out.clamped = dl.clamped;
  auto labels = argmax_rows(soft_assign(enc.output(), centers, m.config.dec_exponent));
  for (auto& l : labels) l = roots[l];

  const double alpha = m.config.alpha;
  if (alpha > 0.0 && update_donor_map) {
    Matrix d_z = dl.d_embedded;
    for (double& v : d_z.data()) v *= alpha;
    store(out.grads, layout.donor_encoder, num::mlp_backward(m.donor_map.encoder, enc, d_z));
    auto& gc = out.grads[layout.centers];
    const std::size_t dim = centers.cols();
    for (std::size_t r = 0; r < roots.size(); ++r) {
      for (std::size_t c = 0; c < dim; ++c) gc[roots[r] * dim + c] = alpha * dl.d_centers(r, c);
    }
  }

  const PredictorLoss pl =
      predictor_loss(m, layout, recipients, outcomes, labels, m.config.beta, out.grads);
  out.l_f = pl.l_f;
  out.l_phi = pl.l_phi;
  out.rep_skipped = pl.rep_skipped;
  out.total = out.l_f + alpha * out.l_dec + m.config.beta * out.l_phi;
  return out;
}

TrainResult train_joint(const data::Dataset& train, const TrainConfig& config) {
  config.validate();
  if (train.size() < std::max<std::size_t>(config.k, 2)) {
    throw InsufficientDataError("training set smaller than the number of clusters");
  }
  num::RngStream root(config.seed);
  num::RngStream init_rng = root.split("init");
  TrainResult result;
  MatchRepModel& m = result.model;
  TrainingLog& log = result.log;
  m = MatchRepModel::initialize(train.schema().recipient_dim(), train.schema().donor_dim(), config,
                                init_rng);
  m.normalization = train.normalization();

  const Matrix xr = train.recipient_matrix();
  const Matrix xo = train.donor_matrix();
  std::vector<double> y = train.outcomes();
  if (config.standardize_outcomes) {
    double mean = 0.0, sq = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    for (double v : y) sq += (v - mean) * (v - mean);
    const double sd = std::sqrt(sq / static_cast<double>(y.size()));
    m.y_shift = mean;
    m.y_scale = sd > 0.0 ? sd : 1.0;
  }
  for (double& v : y) v = (v - m.y_shift) / m.y_scale;

  num::RngStream pretrain_rng = root.split("pretrain");
  log.pretrain_loss = pretrain_autoencoder(m.donor_map, xo, config, pretrain_rng);
  num::RngStream center_rng = root.split("centers");
  init_centers(m.donor_map, xo, config.k, config.center_init, center_rng);

  num::AdamState state(m.trainable_block_sizes());
  num::RngStream batch_rng = root.split("batches");
  std::vector<std::size_t> order = iota_n(train.size());
  const BlockLayout layout = layout_of(m);
  Matrix target;
  std::vector<std::size_t> previous_labels;
  bool donor_map_frozen = false;

  for (std::size_t epoch = 1; epoch <= config.joint_epochs; ++epoch) {
    const MatchRepModel checkpoint = m;
    if ((epoch - 1) % config.target_update_interval == 0) {
      const Matrix t = soft_assign(m.embed_donors(xo), m.donor_map.root_centers(),
                                   config.dec_exponent);
      target = target_distribution(t);
      const auto roots = m.donor_map.roots();
      auto labels = argmax_rows(t);
      for (auto& l : labels) l = roots[l];
      if (!donor_map_frozen && config.dec_tolerance > 0.0 && !previous_labels.empty()) {
        std::size_t changed = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
          if (labels[i] != m.donor_map.root(previous_labels[i])) ++changed;
        }
        if (static_cast<double>(changed) < config.dec_tolerance * static_cast<double>(labels.size())) {
          donor_map_frozen = true;
          log.donor_map_frozen_epoch = epoch;
          log.events.push_back("epoch " + std::to_string(epoch) + ": donor map converged (" +
                               std::to_string(changed) + " label changes)");
        }
      }
      previous_labels = std::move(labels);
    }
    EpochLog entry;
    entry.epoch = epoch;
    std::size_t batches_seen = 0;
    for (const auto& batch : make_batches(order, config.batch_size, batch_rng)) {
      CombinedLoss cl =
          combined_loss(m, num::select_rows(xr, batch), num::select_rows(xo, batch),
                        [&] {
                          std::vector<double> yb;
                          for (auto i : batch) yb.push_back(y[i]);
                          return yb;
                        }(),
                        num::select_rows(target, batch), !donor_map_frozen);
      if (!finite(cl.total)) {
        throw TrainingDiverged("joint loss became non-finite at epoch " + std::to_string(epoch) +
                                   "; lower the learning rate",
                               checkpoint, log);
      }
      try {
        adam_update(m, cl.grads, state, config.learning_rate);
      } catch (const DivergenceError&) {
        throw TrainingDiverged("non-finite gradient at epoch " + std::to_string(epoch) +
                                   "; lower the learning rate",
                               checkpoint, log);
      }
      sync_tied_centers(m.donor_map);
      entry.l_f += cl.l_f;
      entry.l_dec += cl.l_dec;
      entry.l_phi += cl.l_phi;
      if (cl.rep_skipped) ++log.rep_skipped_batches;
      log.clamped_probabilities += cl.clamped;
      ++batches_seen;
    }
    const double nb = static_cast<double>(batches_seen);
    entry.l_f /= nb;
    entry.l_dec /= nb;
    entry.l_phi /= nb;
    entry.total = entry.l_f + config.alpha * entry.l_dec + config.beta * entry.l_phi;
    log.epochs.push_back(entry);
    consider_merges(m, xr, xo, epoch, log);
  }
  m.trained = true;
  return result;
}

DecResult train_dec(const Matrix& donors, const TrainConfig& config) {
  config.validate();
  if (donors.rows() < std::max<std::size_t>(config.k, 2)) {
    throw InsufficientDataError("fewer donors than clusters");
  }
  num::RngStream root(config.seed);
  num::RngStream init_rng = root.split("init");
  DecResult out;
  out.map = MatchRepModel::initialize(1, donors.cols(), config, init_rng).donor_map;
  DonorTypeMap& map = out.map;
  num::RngStream pretrain_rng = root.split("pretrain");
  out.pretrain_loss = pretrain_autoencoder(map, donors, config, pretrain_rng);
  num::RngStream center_rng = root.split("centers");
  init_centers(map, donors, config.k, config.center_init, center_rng);

  std::vector<std::size_t> sizes;
  for (auto b : map.encoder.parameter_blocks()) sizes.push_back(b.size());
  sizes.push_back(map.centers.size());
  num::AdamState state(sizes);
  num::RngStream batch_rng = root.split("dec-batches");
  std::vector<std::size_t> order = iota_n(donors.rows());
  std::vector<std::size_t> previous;
  Matrix target;
  for (std::size_t epoch = 1; epoch <= config.joint_epochs; ++epoch) {
    if ((epoch - 1) % config.target_update_interval == 0) {
      const Matrix t = soft_assign(num::mlp_predict(map.encoder, donors), map.centers,
                                   config.dec_exponent);
      target = target_distribution(t);
      auto labels = argmax_rows(t);
      if (config.dec_tolerance > 0.0 && !previous.empty()) {
        std::size_t changed = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) changed += labels[i] != previous[i];
        if (static_cast<double>(changed) < config.dec_tolerance * static_cast<double>(labels.size())) {
          break;
        }
      }
      previous = std::move(labels);
    }
    double total = 0.0;
    std::size_t batches_seen = 0;
    for (const auto& batch : make_batches(order, config.batch_size, batch_rng)) {
      const auto enc = num::mlp_forward(map.encoder, num::select_rows(donors, batch));
      const DecLoss dl =
          dec_loss(enc.output(), map.centers, num::select_rows(target, batch), config.dec_exponent);
      if (!finite(dl.value)) throw DivergenceError("DEC loss is not finite; lower the learning rate");
      const auto g = num::mlp_backward(map.encoder, enc, dl.d_embedded);
      auto params = map.encoder.parameter_blocks();
      params.push_back(map.centers.data());
      auto grads = g.blocks();
      grads.push_back(dl.d_centers.data());
      num::adam_step(params, grads, state, config.learning_rate);
      total += dl.value;
      ++batches_seen;
    }
    out.dec_loss.push_back(total / static_cast<double>(batches_seen));
  }
  return out;
}

TrainingLog train_with_frozen_labels(MatchRepModel& model, const Matrix& recipients,
                                     const std::vector<double>& outcomes,
                                     const std::vector<std::size_t>& labels) {
  const auto& config = model.config;
  if (recipients.rows() != outcomes.size() || labels.size() != outcomes.size()) {
    throw InvalidInputError("train_with_frozen_labels: row counts differ");
  }
  for (auto l : labels) {
    if (l >= model.k()) throw InvalidInputError("train_with_frozen_labels: label out of range");
  }
  TrainingLog log;
  std::vector<double> y = outcomes;
  if (config.standardize_outcomes) {
    double mean = 0.0, sq = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    for (double v : y) sq += (v - mean) * (v - mean);
    const double sd = std::sqrt(sq / static_cast<double>(y.size()));
    model.y_shift = mean;
    model.y_scale = sd > 0.0 ? sd : 1.0;
  }
  for (double& v : y) v = (v - model.y_shift) / model.y_scale;

  const BlockLayout layout = layout_of(model);
  num::AdamState state(model.trainable_block_sizes());
  num::RngStream batch_rng = num::RngStream(config.seed).split("frozen-batches");
  std::vector<std::size_t> order = iota_n(y.size());
  for (std::size_t epoch = 1; epoch <= config.joint_epochs; ++epoch) {
    EpochLog entry;
    entry.epoch = epoch;
    std::size_t batches_seen = 0;
    for (const auto& batch : make_batches(order, config.batch_size, batch_rng)) {
      auto grads = zero_grads(model);
      std::vector<double> yb;
      std::vector<std::size_t> lb;
      for (auto i : batch) yb.push_back(y[i]), lb.push_back(labels[i]);
      const PredictorLoss pl = predictor_loss(model, layout, num::select_rows(recipients, batch),
                                              yb, lb, config.beta, grads);
      if (!finite(pl.l_f + pl.l_phi)) {
        throw DivergenceError("predictor loss became non-finite; lower the learning rate");
      }
      adam_update(model, grads, state, config.learning_rate);
      entry.l_f += pl.l_f;
      entry.l_phi += pl.l_phi;
      if (pl.rep_skipped) ++log.rep_skipped_batches;
      ++batches_seen;
    }
    entry.l_f /= static_cast<double>(batches_seen);
    entry.l_phi /= static_cast<double>(batches_seen);
    entry.total = entry.l_f + config.beta * entry.l_phi;
    log.epochs.push_back(entry);
  }
  model.trained = true;
  return log;
}

}  // namespace matchrep::model
