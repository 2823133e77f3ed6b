#pragma once
// JSON persistence for trained models.
//
// Every saved model is one JSON document with an envelope
//   {"format": "matchrep-v1", "kind": "<model kind>", ...}
// Weight matrices are stored row-major as nested arrays. Doubles are written
// with shortest round-trip formatting, so save followed by load reproduces
// the parameters bit for bit.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "matchrep/data/dataset.hpp"
#include "matchrep/model/matchrep_model.hpp"
#include "matchrep/numkit/dense_net.hpp"
#include "matchrep/numkit/matrix.hpp"

namespace matchrep::model {

inline constexpr const char* kModelFormat = "matchrep-v1";

nlohmann::json matrix_to_json(const num::Matrix& m);
num::Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json net_to_json(const num::DenseNet& net);
num::DenseNet net_from_json(const nlohmann::json& j);

nlohmann::json normalization_to_json(const data::Normalization& n);
data::Normalization normalization_from_json(const nlohmann::json& j);

nlohmann::json make_envelope(const std::string& kind);
// Throws ConfigError unless `j` carries the expected format and kind.
void check_envelope(const nlohmann::json& j, const std::string& kind);
// The kind of a saved model, after checking the format tag.
std::string envelope_kind(const nlohmann::json& j);

nlohmann::json model_to_json(const MatchRepModel& model);
MatchRepModel model_from_json(const nlohmann::json& j);

// File helpers; failures raise IoError, malformed JSON raises ConfigError.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

void save_model(const std::filesystem::path& path, const MatchRepModel& model);
MatchRepModel load_model(const std::filesystem::path& path);

}  // namespace matchrep::model
