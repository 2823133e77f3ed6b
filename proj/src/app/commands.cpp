#include "matchrep/app/commands.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "matchrep/app/manifest.hpp"
#include "matchrep/app/pipeline.hpp"
#include "matchrep/data/csv.hpp"
#include "matchrep/data/normalize.hpp"
#include "matchrep/data/split.hpp"
#include "matchrep/error.hpp"
#include "matchrep/model/serialize.hpp"
#include "matchrep/model/train.hpp"
#include "matchrep/synth/synthgen.hpp"

namespace matchrep::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kPaperBaselines = {
    "kmeans-linear", "em-linear", "dec-linear", "kmeans-nn",  "em-nn",
    "dec-nn",        "kmeans-nn-rep", "em-nn-rep", "dec-nn-rep", "reg-nn",
    "reg-tree",      "lasso",     "ridge",      "elasticnet"};

const std::vector<std::string> kPaperPolicies = {"real", "fcfs", "uf", "bf",
                                                 "guided-fcfs", "guided-uf", "guided-bf"};

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  try {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void check_keys(const json& config, const std::set<std::string>& allowed, const std::string& cmd) {
  if (!config.is_object()) throw ConfigError("run configuration must be a JSON object");
  for (const auto& [key, value] : config.items()) {
    if (!allowed.count(key)) throw ConfigError(cmd + ": unknown config key '" + key + "'");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void prepare_out(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw IoError("cannot create output directory " + out.string());
}

data::SchemaConfig generated_schema(const data::Dataset& d) {
  data::SchemaConfig s;
  s.recipient_columns = d.schema().recipient_features;
  s.donor_columns = d.schema().donor_features;
  s.outcome_column = "survival";
  return s;
}

// Resolves the "data" section: schema defaults to schema.json beside the CSV
// and truth to ground_truth.csv beside it when those files exist.
json resolve_data(const json& config) {
  if (!config.contains("data") || !config["data"].contains("csv")) {
    throw ConfigError("no dataset given (set data.csv or pass --data)");
  }
  json d = config["data"];
  const fs::path csv = d["csv"].get<std::string>();
  if (!d.contains("schema") || d["schema"].is_null()) {
    const fs::path guess = csv.parent_path() / "schema.json";
    if (!fs::exists(guess)) throw ConfigError("no schema given and " + guess.string() + " is missing");
    d["schema"] = guess.generic_string();
  }
  if (!d.contains("truth")) {
    const fs::path guess = csv.parent_path() / "ground_truth.csv";
    d["truth"] = fs::exists(guess) ? json(guess.generic_string()) : json(nullptr);
  }
  return d;
}

data::Dataset load_data(const json& d, std::vector<fs::path>& inputs) {
  const std::string csv = d.at("csv").get<std::string>();
  const std::string schema = d.at("schema").get<std::string>();
  data::Dataset ds = data::load_csv(csv, data::SchemaConfig::load(schema));
  inputs.push_back(csv);
  inputs.push_back(schema);
  if (!d.at("truth").is_null()) {
    const std::string truth = d.at("truth").get<std::string>();
    data::attach_ground_truth(ds, truth);
    inputs.push_back(truth);
  }
  return ds;
}

bool is_pair_regressor(const std::string& name) {
  for (auto k : baselines::all_pair_kinds()) {
    if (baselines::to_string(k) == name) return true;
  }
  return false;
}

baselines::PairRegressorOptions pair_options(const json& j, std::uint64_t seed) {
  baselines::PairRegressorOptions o;
  o.seed = seed;
  check_keys(j, {"ridge_penalty", "lasso_lambda", "elasticnet_lambda", "elasticnet_l1_ratio",
                 "tree_max_depth", "tree_min_leaf", "nn_hidden", "nn_epochs", "nn_batch_size",
                 "nn_learning_rate"},
             "pair_regressors");
  o.ridge_penalty = get_or(j, "ridge_penalty", o.ridge_penalty);
  o.lasso_lambda = get_or(j, "lasso_lambda", o.lasso_lambda);
  o.elasticnet_lambda = get_or(j, "elasticnet_lambda", o.elasticnet_lambda);
  o.elasticnet_l1_ratio = get_or(j, "elasticnet_l1_ratio", o.elasticnet_l1_ratio);
  o.tree.max_depth = get_or(j, "tree_max_depth", o.tree.max_depth);
  o.tree.min_leaf = get_or(j, "tree_min_leaf", o.tree.min_leaf);
  o.nn_hidden = get_or(j, "nn_hidden", o.nn_hidden);
  o.nn_epochs = get_or(j, "nn_epochs", o.nn_epochs);
  o.nn_batch_size = get_or(j, "nn_batch_size", o.nn_batch_size);
  o.nn_learning_rate = get_or(j, "nn_learning_rate", o.nn_learning_rate);
  if (o.nn_batch_size == 0) throw ConfigError("pair_regressors.nn_batch_size must be >= 1");
  return o;
}

std::string csv_opt(const std::optional<double>& v) {
  return v ? data::format_double(*v) : std::string("n.a.");
}

}  // namespace

json merge_config(json base, const json& patch) {
  if (!patch.is_object()) throw ConfigError("configuration must be a JSON object");
  for (const auto& [key, value] : patch.items()) {
    if (value.is_object() && base.contains(key) && base[key].is_object()) {
      base[key] = merge_config(base[key], value);
    } else {
      base[key] = value;
    }
  }
  return base;
}

json preset_config(const std::string& command, const std::optional<std::string>& preset) {
  json c = json::object();
  c["seed"] = 0;
  if (preset && *preset != "paper-5.1") throw ConfigError("unknown preset '" + *preset + "'");
  const bool paper = preset.has_value();
  if (command == "gen") {
    c["synthetic"] = {{"preset", "paper-5.1"}};
  } else if (command == "train") {
    c["train"] = model::TrainConfig{}.to_json();
    c["train"].erase("seed");
    c["validation_fraction"] = 0.1;
    c["baselines"] = paper ? json(kPaperBaselines) : json::array();
    c["pair_regressors"] = json::object();
  } else if (command == "eval") {
    c["subset"] = "validation";
  } else if (command == "simulate") {
    c["policies"] = kPaperPolicies;
    c["scorer"] = "reg-nn";
    c["guided_scorer"] = "matchrep";
    c["stream"] = sim::StreamConfig{}.to_json();
    if (paper) c["stream_seeds"] = {1, 2, 3, 4, 5};
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
  return c;
}

void cmd_gen(const json& input, const fs::path& out) {
  check_keys(input, {"seed", "synthetic", "source", "semi_synthetic"}, "gen");
  json config = input;
  const auto seed = get_or<std::uint64_t>(config, "seed", 0);
  prepare_out(out);
  Manifest manifest{"gen", {}, {}, {}};
  data::Dataset ds;
  data::SchemaConfig schema;
  if (config.contains("source")) {
    const json& src = config["source"];
    if (!src.contains("csv") || !src.contains("schema")) {
      throw ConfigError("gen: source needs csv and schema");
    }
    const std::string csv = src["csv"].get<std::string>();
    const std::string schema_path = src["schema"].get<std::string>();
    schema = data::SchemaConfig::load(schema_path);
    const data::Dataset base = data::load_csv(csv, schema);
    manifest.inputs = {csv, schema_path};
    json semi = config.value("semi_synthetic", json::object());
    check_keys(semi, {"k", "scale", "noise_sd", "weight_sd", "untreated_scale"}, "semi_synthetic");
    synth::SemiSyntheticOptions o;
    o.scale = get_or(semi, "scale", o.scale);
    o.noise_sd = get_or(semi, "noise_sd", o.noise_sd);
    o.weight_sd = get_or(semi, "weight_sd", o.weight_sd);
    o.untreated_scale = get_or(semi, "untreated_scale", o.untreated_scale);
    const auto k = get_or<std::size_t>(semi, "k", 3);
    ds = synth::semi_synthetic_outcomes(base, k, seed, o);
    config["semi_synthetic"] = {{"k", k},
                                {"scale", o.scale},
                                {"noise_sd", o.noise_sd},
                                {"weight_sd", o.weight_sd},
                                {"untreated_scale", o.untreated_scale}};
  } else {
    synth::SyntheticConfig sc =
        synth::SyntheticConfig::from_json(config.value("synthetic", json::object()));
    sc.seed = seed;
    ds = synth::sample_dataset(sc);
    config["synthetic"] = sc.to_json();
    schema = generated_schema(ds);
  }
  config["seed"] = seed;
  data::write_csv(ds, schema, (out / "dataset.csv").string());
  {
    std::ofstream truth(out / "ground_truth.csv", std::ios::binary | std::ios::trunc);
    if (!truth) throw IoError("cannot write " + (out / "ground_truth.csv").string());
    data::write_ground_truth(ds, truth);
  }
  model::write_json_file(out / "schema.json", schema.to_json());
  manifest.config = config;
  manifest.outputs = {"dataset.csv", "ground_truth.csv", "schema.json"};
  manifest.write(out);
  std::cout << "wrote " << ds.size() << " records to " << (out / "dataset.csv").string() << "\n";
}

void cmd_train(const json& input, const fs::path& out) {
  check_keys(input,
             {"seed", "data", "train", "validation_fraction", "baselines", "pair_regressors"},
             "train");
  json config = input;
  const auto seed = get_or<std::uint64_t>(config, "seed", 0);
  config["data"] = resolve_data(config);
  json train_json = config.value("train", json::object());
  train_json["seed"] = seed;
  const model::TrainConfig tc = model::TrainConfig::from_json(train_json);
  const double fraction = get_or(config, "validation_fraction", 0.1);
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("validation_fraction must be in (0, 1)");
  const auto names = get_or(config, "baselines", std::vector<std::string>{});
  const auto popts = pair_options(config.value("pair_regressors", json::object()), seed);
  std::set<std::string> unique;
  for (const auto& n : names) {
    if (n == "matchrep" || !unique.insert(n).second) throw ConfigError("duplicate model name '" + n + "'");
    if (!is_pair_regressor(n)) baselines::ClusterPredictorSpec::from_name(n, tc);
  }
  prepare_out(out);
  fs::create_directories(out / "models");

  Manifest manifest{"train", {}, {}, {}};
  const data::Dataset raw = load_data(config["data"], manifest.inputs);
  const auto split = data::split(raw, 1.0 - fraction, seed);
  const data::Dataset normalized = data::normalize_fit_transform(raw, split);
  const data::Dataset train = normalized.subset(split.train);

  auto result = model::train_joint(train, tc);
  model::save_model(out / "models" / "matchrep.json", result.model);
  manifest.outputs.push_back("models/matchrep.json");

  std::string log = "epoch,L_f,L_DEC,L_Phi,total\n";
  for (const auto& e : result.log.epochs) {
    log += std::to_string(e.epoch) + "," + data::format_double(e.l_f) + "," +
           data::format_double(e.l_dec) + "," + data::format_double(e.l_phi) + "," +
           data::format_double(e.total) + "\n";
  }
  write_text(out / "training_log.csv", log);
  manifest.outputs.push_back("training_log.csv");

  json notes{{"pretrain_loss", result.log.pretrain_loss},
             {"events", result.log.events},
             {"rep_skipped_batches", result.log.rep_skipped_batches},
             {"clamped_probabilities", result.log.clamped_probabilities},
             {"baseline_warnings", json::object()}};
  for (const auto& name : names) {
    std::vector<std::string> warnings;
    json model_json;
    if (is_pair_regressor(name)) {
      auto r = baselines::fit_pair_regressor(train, baselines::pair_kind_from_string(name), popts);
      warnings = r.warnings;
      model_json = r.to_json();
    } else {
      auto b = baselines::fit_cluster_predictor(train, baselines::ClusterPredictorSpec::from_name(name, tc));
      warnings = b.warnings;
      model_json = b.to_json();
    }
    for (const auto& w : warnings) std::cerr << "warning: " << name << ": " << w << "\n";
    notes["baseline_warnings"][name] = warnings;
    model::write_json_file(out / "models" / (name + ".json"), model_json);
    manifest.outputs.push_back("models/" + name + ".json");
  }
  model::write_json_file(out / "training_notes.json", notes);
  model::write_json_file(out / "split.json", {{"train", split.train}, {"validation", split.validation}});
  manifest.outputs.push_back("training_notes.json");
  manifest.outputs.push_back("split.json");

  config["seed"] = seed;
  train_json.erase("seed");
  config["train"] = merge_config(train_json, tc.to_json());
  config["train"].erase("seed");
  config["validation_fraction"] = fraction;
  config["baselines"] = names;
  manifest.config = config;
  manifest.write(out);
  std::cout << "trained matchrep and " << names.size() << " baseline(s) on " << train.size()
            << " records\n";
}

void cmd_eval(const json& input, const fs::path& out) {
  check_keys(input, {"seed", "data", "models", "split", "subset"}, "eval");
  json config = input;
  config["data"] = resolve_data(config);
  const auto model_paths = get_or(config, "models", std::vector<std::string>{});
  if (model_paths.empty()) throw ConfigError("eval: no models given");
  const auto subset = get_or<std::string>(config, "subset", "validation");
  if (subset != "validation" && subset != "train" && subset != "all") {
    throw ConfigError("eval: subset must be validation, train or all");
  }
  prepare_out(out);
  fs::create_directories(out / "eval");
  Manifest manifest{"eval", {}, {}, {}};
  data::Dataset raw = load_data(config["data"], manifest.inputs);
  if (subset != "all") {
    if (!config.contains("split") || config["split"].is_null()) {
      throw ConfigError("eval: subset '" + subset + "' needs the split.json written by train");
    }
    const std::string split_path = config["split"].get<std::string>();
    const json split = model::read_json_file(split_path);
    manifest.inputs.push_back(split_path);
    const auto rows = split.at(subset).get<std::vector<std::size_t>>();
    for (auto r : rows) {
      if (r >= raw.size()) throw InvalidInputError("split index beyond the dataset");
    }
    raw = raw.subset(rows);
  }
  std::string table = metrics::EvalReport::csv_header() + "\n";
  for (const auto& p : model_paths) {
    const AnyModel m = load_any_model(p);
    manifest.inputs.push_back(p);
    const metrics::EvalReport report = evaluate(m, raw);
    model::write_json_file(out / "eval" / (m.name + ".json"), report.to_json());
    manifest.outputs.push_back("eval/" + m.name + ".json");
    table += report.csv_row() + "\n";
  }
  write_text(out / "comparison.csv", table);
  manifest.outputs.push_back("comparison.csv");
  config["subset"] = subset;
  manifest.config = config;
  manifest.write(out);
  std::cout << table;
}

void cmd_simulate(const json& input, const fs::path& out) {
  check_keys(input,
             {"seed", "data", "models", "policies", "scorer", "guided_scorer", "stream",
              "stream_seeds"},
             "simulate");
  json config = input;
  const auto seed = get_or<std::uint64_t>(config, "seed", 0);
  config["data"] = resolve_data(config);
  const auto model_paths = get_or(config, "models", std::vector<std::string>{});
  const auto policies = get_or(config, "policies", kPaperPolicies);
  const auto scorer = get_or<std::string>(config, "scorer", "reg-nn");
  const auto guided = get_or<std::string>(config, "guided_scorer", "matchrep");
  const sim::StreamConfig stream = sim::StreamConfig::from_json(config.value("stream", json::object()));
  const auto seeds = get_or(config, "stream_seeds", std::vector<std::uint64_t>{seed});
  if (policies.empty() || seeds.empty()) throw ConfigError("simulate: need policies and stream seeds");
  std::vector<PolicyRequest> requests;
  for (const auto& p : policies) requests.push_back(parse_policy_request(p, scorer, guided));

  prepare_out(out);
  fs::create_directories(out / "ledgers");
  Manifest manifest{"simulate", {}, {}, {}};
  const data::Dataset raw = load_data(config["data"], manifest.inputs);
  std::vector<AnyModel> models;
  for (const auto& p : model_paths) {
    models.push_back(load_any_model(p));
    manifest.inputs.push_back(p);
  }

  struct Sums {
    double death = 0.0;
    std::map<std::string, std::pair<double, std::size_t>> opt;
  };
  std::vector<Sums> sums(requests.size());
  std::string by_seed = "stream_seed," + sim::SimReport::csv_header() + "\n";
  for (auto s : seeds) {
    const auto reports = simulate_policies(raw, stream, s, requests, models);
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& r = reports[i];
      by_seed += std::to_string(s) + "," + r.csv_row() + "\n";
      sums[i].death += r.death_rate;
      for (const auto& [key, v] : std::vector<std::pair<std::string, std::optional<double>>>{
               {"avg_survival", r.avg_survival}, {"avg_benefit", r.avg_benefit},
               {"flipped_ratio", r.flipped_ratio}}) {
        if (v) {
          sums[i].opt[key].first += *v;
          sums[i].opt[key].second += 1;
        }
      }
      std::string file = r.policy;
      for (char& c : file) {
        if (c == ':') c = '_';
      }
      const fs::path rel = fs::path("ledgers") / (file + "_seed" + std::to_string(s) + ".csv");
      write_text(out / rel, r.ledger_csv());
      manifest.outputs.push_back(rel);
    }
  }
  std::string table = "policy,death_rate,avg_survival,avg_benefit,flipped_ratio,stream_seeds\n";
  for (std::size_t i = 0; i < requests.size(); ++i) {
    auto mean = [&](const std::string& key) -> std::optional<double> {
      auto it = sums[i].opt.find(key);
      if (it == sums[i].opt.end()) return std::nullopt;
      return it->second.first / static_cast<double>(it->second.second);
    };
    table += requests[i].label + "," +
             data::format_double(sums[i].death / static_cast<double>(seeds.size())) + "," +
             csv_opt(mean("avg_survival")) + "," + csv_opt(mean("avg_benefit")) + "," +
             csv_opt(mean("flipped_ratio")) + "," + std::to_string(seeds.size()) + "\n";
  }
  write_text(out / "simulation.csv", table);
  write_text(out / "simulation_by_seed.csv", by_seed);
  manifest.outputs.push_back("simulation.csv");
  manifest.outputs.push_back("simulation_by_seed.csv");
  config["seed"] = seed;
  config["policies"] = policies;
  config["scorer"] = scorer;
  config["guided_scorer"] = guided;
  config["stream"] = stream.to_json();
  config["stream_seeds"] = seeds;
  manifest.config = config;
  manifest.write(out);
  std::cout << table;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const UsageError*>(&e)) return 2;
  if (dynamic_cast<const IngestionError*>(&e) || dynamic_cast<const InvalidInputError*>(&e) ||
      dynamic_cast<const InsufficientDataError*>(&e) ||
      dynamic_cast<const UnsupportedDatasetError*>(&e)) {
    return 3;
  }
  if (dynamic_cast<const DivergenceError*>(&e) || dynamic_cast<const DeadClusterError*>(&e)) return 4;
  if (dynamic_cast<const IoError*>(&e)) return 5;
  return 1;
}

}  // namespace matchrep::app
