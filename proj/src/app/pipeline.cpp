#include "matchrep/app/pipeline.hpp"

#include <algorithm>
#include <memory>

#include "matchrep/data/normalize.hpp"
#include "matchrep/error.hpp"
#include "matchrep/model/losses.hpp"
#include "matchrep/model/serialize.hpp"

namespace matchrep::app {

using num::Matrix;

const std::optional<data::Normalization>& AnyModel::normalization() const {
  return std::visit(
      [](const auto& m) -> const std::optional<data::Normalization>& { return m.normalization; },
      model);
}

bool AnyModel::has_donor_types() const {
  return !std::holds_alternative<baselines::PairRegressor>(model);
}

nlohmann::json AnyModel::to_json() const {
  if (const auto* m = std::get_if<model::MatchRepModel>(&model)) return model::model_to_json(*m);
  if (const auto* c = std::get_if<baselines::ClusterPredictorBaseline>(&model)) return c->to_json();
  return std::get<baselines::PairRegressor>(model).to_json();
}

AnyModel AnyModel::from_json(const nlohmann::json& j, std::string name) {
  const std::string kind = model::envelope_kind(j);
  AnyModel out;
  out.name = std::move(name);
  if (kind == "matchrep") {
    out.model = model::model_from_json(j);
  } else if (kind == "cluster-predictor") {
    out.model = baselines::ClusterPredictorBaseline::from_json(j);
  } else if (kind.rfind("pair-", 0) == 0) {
    out.model = baselines::PairRegressor::from_json(j);
  } else {
    throw ConfigError("unknown model kind '" + kind + "'");
  }
  return out;
}

AnyModel load_any_model(const std::filesystem::path& path) {
  return AnyModel::from_json(model::read_json_file(path), path.stem().string());
}

data::Dataset prepare_features(const data::Dataset& raw,
                               const std::optional<data::Normalization>& normalization) {
  if (!normalization) return raw;
  const auto& n = *normalization;
  if (n.recipient_mean.size() != raw.schema().recipient_dim() ||
      n.donor_mean.size() != raw.schema().donor_dim()) {
    throw InvalidInputError("model and dataset feature widths differ");
  }
  return data::apply_normalization(raw, n);
}

TypedPredictions predict_typed(const AnyModel& m, const data::Dataset& prepared) {
  TypedPredictions out;
  const Matrix xr = prepared.recipient_matrix();
  const Matrix xo = prepared.donor_matrix();
  if (const auto* mr = std::get_if<model::MatchRepModel>(&m.model)) {
    if (xr.cols() != mr->recipient_dim() || xo.cols() != mr->donor_dim()) {
      throw InvalidInputError("model and dataset feature widths differ");
    }
    out.potentials = mr->predict_potentials(xr);
    out.donor_types = mr->donor_types(xo);
    for (std::size_t j = 0; j < mr->k(); ++j) out.alias.push_back(mr->donor_map.root(j));
    return out;
  }
  if (const auto* cp = std::get_if<baselines::ClusterPredictorBaseline>(&m.model)) {
    out.potentials = cp->predict_potentials(xr);
    out.donor_types = cp->assign(xo);
    return out;
  }
  throw UsageError("model '" + m.name + "' has no donor types");
}

std::vector<std::size_t> coarse_truth(const data::Dataset& dataset) {
  std::vector<std::size_t> labels;
  for (const auto& r : dataset.records()) {
    if (!r.true_donor_type) throw UnsupportedDatasetError("dataset has no donor type labels");
    labels.push_back(*r.true_donor_type == 0 ? 0 : 1);
  }
  return labels;
}

metrics::EvalReport evaluate(const AnyModel& m, const data::Dataset& raw) {
  metrics::EvalReport report;
  report.model = m.name;
  report.n = raw.size();
  const data::Dataset prepared = prepare_features(raw, m.normalization());
  const std::vector<double> y = raw.outcomes();
  if (const auto* pr = std::get_if<baselines::PairRegressor>(&m.model)) {
    const auto pred = pr->predict(prepared.recipient_matrix(), prepared.donor_matrix());
    Matrix col(pred.size(), 1);
    for (std::size_t i = 0; i < pred.size(); ++i) col(i, 0) = pred[i];
    report.eps_f = metrics::eps_factual(col, std::vector<std::size_t>(pred.size(), 0), y);
    report.mean_best_prediction = metrics::mean_best_prediction(col);
    return report;
  }
  const TypedPredictions tp = predict_typed(m, prepared);
  report.eps_f = metrics::eps_factual(tp.potentials, tp.donor_types, y);
  report.mean_best_prediction = metrics::mean_best_prediction(tp.potentials);
  if (raw.has_ground_truth()) {
    Matrix truth(raw.size(), raw.potential_count());
    std::vector<std::size_t> true_types;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const auto& p = *raw[i].true_potentials;
      std::copy(p.begin(), p.end(), truth.row(i).begin());
      true_types.push_back(static_cast<std::size_t>(*raw[i].true_donor_type));
    }
    const Matrix projected = metrics::project_truth(truth, tp.donor_types, true_types,
                                                    tp.potentials.cols(), tp.alias);
    report.eps_wmse = metrics::eps_wmse(tp.potentials, projected);
    report.aodt = metrics::aodt(tp.potentials, projected);
  }
  return report;
}

sim::Scorer make_scorer(const AnyModel& m, const data::Dataset& raw) {
  const data::Dataset prepared = prepare_features(raw, m.normalization());
  sim::Scorer s;
  if (const auto* pr = std::get_if<baselines::PairRegressor>(&m.model)) {
    auto reg = std::make_shared<baselines::PairRegressor>(*pr);
    auto xr = std::make_shared<Matrix>(prepared.recipient_matrix());
    auto xo = std::make_shared<Matrix>(prepared.donor_matrix());
    s.score = [reg, xr, xo](std::span<const std::size_t> ids, std::size_t donor) {
      Matrix r = num::select_rows(*xr, ids);
      Matrix d(ids.size(), xo->cols());
      for (std::size_t i = 0; i < ids.size(); ++i) {
        std::copy(xo->row(donor).begin(), xo->row(donor).end(), d.row(i).begin());
      }
      return reg->predict(r, d);
    };
    const std::string name = m.name;
    s.best_type = [name](std::size_t) -> std::size_t {
      throw ConfigError("guided policies need a donor-type model; '" + name + "' is a pair regressor");
    };
    s.donor_type = s.best_type;
    return s;
  }
  auto tp = std::make_shared<TypedPredictions>(predict_typed(m, prepared));
  auto best = std::make_shared<std::vector<std::size_t>>();
  for (std::size_t i = 0; i < tp->potentials.rows(); ++i) {
    const auto row = tp->potentials.row(i);
    best->push_back(static_cast<std::size_t>(
        std::distance(row.begin(), std::max_element(row.begin(), row.end()))));
  }
  s.score = [tp](std::span<const std::size_t> ids, std::size_t donor) {
    std::vector<double> v;
    v.reserve(ids.size());
    const std::size_t k = tp->donor_types.at(donor);
    for (auto r : ids) v.push_back(tp->potentials(r, k));
    return v;
  };
  s.best_type = [best](std::size_t r) { return best->at(r); };
  s.donor_type = [tp](std::size_t d) { return tp->donor_types.at(d); };
  return s;
}

PolicyRequest parse_policy_request(const std::string& text, const std::string& default_scorer,
                                   const std::string& guided_default) {
  PolicyRequest req;
  const auto colon = text.find(':');
  req.policy = sim::Policy::from_name(text.substr(0, colon));
  if (colon != std::string::npos) {
    req.scorer = text.substr(colon + 1);
    if (req.scorer->empty()) throw ConfigError("policy '" + text + "' names an empty scorer");
  } else if (req.policy.guided) {
    req.scorer = guided_default;
  } else if (req.policy.rule == sim::Rule::utility_first ||
             req.policy.rule == sim::Rule::benefit_first) {
    req.scorer = default_scorer;
  }
  req.label = req.policy.name();
  if (req.scorer && colon != std::string::npos) req.label += ":" + *req.scorer;
  return req;
}

std::vector<sim::SimReport> simulate_policies(const data::Dataset& raw,
                                              const sim::StreamConfig& stream_config,
                                              std::uint64_t stream_seed,
                                              const std::vector<PolicyRequest>& requests,
                                              const std::vector<AnyModel>& models) {
  const sim::OutcomeOracle oracle = sim::OutcomeOracle::from_dataset(raw);
  const sim::EventStream stream = sim::build_stream(raw, stream_config, stream_seed);
  const sim::SimReport real = sim::run_policy(stream, {sim::Rule::real, false}, nullptr, oracle);

  std::vector<std::pair<std::string, sim::Scorer>> scorers;
  auto scorer_for = [&](const std::string& name) -> const sim::Scorer* {
    for (const auto& [n, s] : scorers) {
      if (n == name) return &s;
    }
    for (const auto& m : models) {
      if (m.name == name) {
        scorers.emplace_back(name, make_scorer(m, raw));
        return &scorers.back().second;
      }
    }
    throw ConfigError("policy scorer '" + name + "' is not among the loaded models");
  };

  std::vector<sim::SimReport> out;
  for (const auto& req : requests) {
    const sim::Scorer* scorer = req.scorer ? scorer_for(*req.scorer) : nullptr;
    sim::SimReport r = req.policy.rule == sim::Rule::real && !req.policy.guided
                           ? real
                           : sim::run_policy(stream, req.policy, scorer, oracle);
    r.policy = req.label;
    if (!(req.policy.rule == sim::Rule::real)) sim::compare_to_reference(r, real, raw);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace matchrep::app
