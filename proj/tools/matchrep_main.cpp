// Command-line front end: matchrep {gen,train,eval,simulate}.
//
// Settings are layered: command defaults, then --preset, then --config (a
// config file or a manifest.json from an earlier run), then explicit flags.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "matchrep/app/commands.hpp"
#include "matchrep/app/manifest.hpp"
#include "matchrep/error.hpp"

namespace {

using nlohmann::json;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::string> preset;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON config file or manifest.json of a previous run")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "root random seed");
  cmd->add_option("--out", c.out, "output directory")->required();
  cmd->add_option("--preset", c.preset, "named preset")->check(CLI::IsMember({"paper-5.1"}));
}

struct DataFlags {
  std::optional<std::string> csv, schema, truth;
};

void add_data(CLI::App* cmd, DataFlags& d) {
  cmd->add_option("--data", d.csv, "dataset CSV");
  cmd->add_option("--schema", d.schema, "schema JSON (default: schema.json next to the CSV)");
  cmd->add_option("--truth", d.truth, "ground-truth CSV (default: ground_truth.csv next to the CSV)");
}

void apply_data(json& flags, const DataFlags& d) {
  if (d.csv) flags["data"]["csv"] = *d.csv;
  if (d.schema) flags["data"]["schema"] = *d.schema;
  if (d.truth) flags["data"]["truth"] = *d.truth;
}

json resolve(const std::string& command, const Common& c, const json& flags) {
  using matchrep::app::merge_config;
  json config = matchrep::app::preset_config(command, c.preset);
  if (!c.config_path.empty()) config = merge_config(config, matchrep::app::config_from_file(c.config_path));
  if (c.seed) config["seed"] = *c.seed;
  return merge_config(config, flags);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Donor-type representation learning for organ allocation"};
  app.require_subcommand(1);

  Common gen_c, train_c, eval_c, sim_c;
  json gen_f = json::object(), train_f = json::object(), eval_f = json::object(),
       sim_f = json::object();

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  add_common(gen, gen_c);
  std::optional<std::size_t> n, k;
  std::optional<std::string> from_csv, from_schema;
  gen->add_option("--n", n, "number of records")->check(CLI::PositiveNumber);
  gen->add_option("--from-csv", from_csv, "real features: attach semi-synthetic outcomes");
  gen->add_option("--schema", from_schema, "schema for --from-csv");
  gen->add_option("--k", k, "donor types for semi-synthetic outcomes")->check(CLI::PositiveNumber);

  auto* train = app.add_subcommand("train", "train matchrep and baselines");
  add_common(train, train_c);
  DataFlags train_d;
  add_data(train, train_d);
  std::optional<double> alpha, beta;
  std::optional<std::size_t> train_k, epochs;
  std::optional<std::vector<std::string>> baselines;
  train->add_option("--alpha", alpha, "weight of the clustering loss");
  train->add_option("--beta", beta, "weight of the representation loss");
  train->add_option("--k", train_k, "number of donor types")->check(CLI::PositiveNumber);
  train->add_option("--epochs", epochs, "joint training epochs");
  train->add_option("--baselines", baselines, "baseline names, comma separated")->delimiter(',');

  auto* eval = app.add_subcommand("eval", "score saved models");
  add_common(eval, eval_c);
  DataFlags eval_d;
  add_data(eval, eval_d);
  std::optional<std::vector<std::string>> eval_models;
  std::optional<std::string> split, subset;
  eval->add_option("--models", eval_models, "model files")->delimiter(',');
  eval->add_option("--split", split, "split.json written by train");
  eval->add_option("--subset", subset, "validation, train or all")
      ->check(CLI::IsMember({"validation", "train", "all"}));

  auto* simulate = app.add_subcommand("simulate", "replay allocation policies");
  add_common(simulate, sim_c);
  DataFlags sim_d;
  add_data(simulate, sim_d);
  std::optional<std::vector<std::string>> sim_models, policies;
  std::optional<std::vector<std::uint64_t>> stream_seeds;
  std::optional<std::string> scorer, guided_scorer;
  std::optional<std::size_t> window;
  std::optional<double> days_per_step;
  simulate->add_option("--models", sim_models, "model files")->delimiter(',');
  simulate->add_option("--policies", policies, "policy[:scorer] list")->delimiter(',');
  simulate->add_option("--scorer", scorer, "default scorer for uf and bf");
  simulate->add_option("--guided-scorer", guided_scorer, "default scorer for guided policies");
  simulate->add_option("--stream-seeds", stream_seeds, "arrival stream seeds")->delimiter(',');
  simulate->add_option("--window", window, "maximum donor lag in steps");
  simulate->add_option("--days-per-step", days_per_step, "days per simulation step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const char* which = "matchrep";
  try {
    if (gen->parsed()) {
      which = "gen";
      if (n) gen_f["synthetic"]["n"] = *n;
      if (from_csv || from_schema) {
        if (!from_csv || !from_schema) throw matchrep::UsageError("--from-csv and --schema go together");
        gen_f["source"] = {{"csv", *from_csv}, {"schema", *from_schema}};
      }
      if (k) gen_f["semi_synthetic"]["k"] = *k;
      json config = resolve("gen", gen_c, gen_f);
      if (config.contains("source")) config.erase("synthetic");
      matchrep::app::cmd_gen(config, gen_c.out);
    } else if (train->parsed()) {
      which = "train";
      apply_data(train_f, train_d);
      if (alpha) train_f["train"]["alpha"] = *alpha;
      if (beta) train_f["train"]["beta"] = *beta;
      if (train_k) train_f["train"]["k"] = *train_k;
      if (epochs) train_f["train"]["joint_epochs"] = *epochs;
      if (baselines) train_f["baselines"] = *baselines;
      matchrep::app::cmd_train(resolve("train", train_c, train_f), train_c.out);
    } else if (eval->parsed()) {
      which = "eval";
      apply_data(eval_f, eval_d);
      if (eval_models) eval_f["models"] = *eval_models;
      if (split) eval_f["split"] = *split;
      if (subset) eval_f["subset"] = *subset;
      matchrep::app::cmd_eval(resolve("eval", eval_c, eval_f), eval_c.out);
    } else if (simulate->parsed()) {
      which = "simulate";
      apply_data(sim_f, sim_d);
      if (sim_models) sim_f["models"] = *sim_models;
      if (policies) sim_f["policies"] = *policies;
      if (scorer) sim_f["scorer"] = *scorer;
      if (guided_scorer) sim_f["guided_scorer"] = *guided_scorer;
      if (stream_seeds) sim_f["stream_seeds"] = *stream_seeds;
      if (window) sim_f["stream"]["window"] = *window;
      if (days_per_step) sim_f["stream"]["days_per_step"] = *days_per_step;
      matchrep::app::cmd_simulate(resolve("simulate", sim_c, sim_f), sim_c.out);
    }
  } catch (const std::exception& e) {
    std::cerr << "matchrep " << which << ": error: " << e.what() << "\n";
    return matchrep::app::exit_code_for(e);
  }
  return 0;
}
