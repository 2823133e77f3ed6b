#pragma once
// The four experiment commands. Each takes a JSON run configuration, fills
// in defaults, writes its artifacts under `out` and finishes with a
// manifest.json holding the resolved configuration and SHA-256 digests.
//
// Configuration keys (all optional unless noted):
//   seed                  root seed shared by every component
//   synthetic             SyntheticConfig fields, or {"preset": "paper-5.1"}   [gen]
//   source                {"csv", "schema"}: semi-synthetic outcomes for real
//                         features instead of sampling                        [gen]
//   semi_synthetic        {"k", "scale", "noise_sd", "weight_sd", "untreated_scale"}
//   data                  {"csv" (required), "schema", "truth"}     [train, eval, simulate]
//   train                 TrainConfig fields                                  [train]
//   validation_fraction   held-out share, default 0.1                         [train]
//   baselines             names such as "kmeans-nn-rep" or "reg-tree"         [train]
//   pair_regressors       PairRegressorOptions overrides                      [train]
//   models                model file paths (required)                  [eval, simulate]
//   split, subset         split.json from train and "validation", "train" or "all" [eval]
//   policies, scorer, guided_scorer, stream, stream_seeds                     [simulate]

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

namespace matchrep::app {

// Defaults for a command, optionally seeded from a named preset.
nlohmann::json preset_config(const std::string& command, const std::optional<std::string>& preset);

// `patch` keys replace those of `base`; nested objects are merged.
nlohmann::json merge_config(nlohmann::json base, const nlohmann::json& patch);

void cmd_gen(const nlohmann::json& config, const std::filesystem::path& out);
void cmd_train(const nlohmann::json& config, const std::filesystem::path& out);
void cmd_eval(const nlohmann::json& config, const std::filesystem::path& out);
void cmd_simulate(const nlohmann::json& config, const std::filesystem::path& out);

// Maps an exception to the process exit code documented in the README.
int exit_code_for(const std::exception& e);

}  // namespace matchrep::app
