#include "matchrep/model/serialize.hpp"

#include <fstream>
#include <sstream>

#include "matchrep/error.hpp"

namespace matchrep::model {

using nlohmann::json;

json matrix_to_json(const num::Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

num::Matrix matrix_from_json(const json& j) {
  try {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    const auto& data = j.at("data");
    if (data.size() != rows) throw ConfigError("matrix: row count mismatch");
    num::Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      if (data[r].size() != cols) throw ConfigError("matrix: column count mismatch");
      for (std::size_t c = 0; c < cols; ++c) m(r, c) = data[r][c].get<double>();
    }
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("matrix: ") + e.what());
  }
}

json net_to_json(const num::DenseNet& net) {
  json layers = json::array();
  for (const auto& layer : net.layers()) {
    layers.push_back({{"weight", matrix_to_json(layer.weight)},
                      {"bias", layer.bias},
                      {"activation", num::to_string(layer.activation)}});
  }
  return json{{"layers", std::move(layers)}};
}

num::DenseNet net_from_json(const json& j) {
  try {
    std::vector<num::DenseLayer> layers;
    for (const auto& l : j.at("layers")) {
      num::DenseLayer layer;
      layer.weight = matrix_from_json(l.at("weight"));
      layer.bias = l.at("bias").get<std::vector<double>>();
      layer.activation = num::activation_from_string(l.at("activation").get<std::string>());
      layers.push_back(std::move(layer));
    }
    return num::DenseNet(std::move(layers));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("network: ") + e.what());
  } catch (const InvalidInputError& e) {
    throw ConfigError(std::string("network: ") + e.what());
  }
}

json normalization_to_json(const data::Normalization& n) {
  return json{{"recipient_mean", n.recipient_mean},
              {"recipient_scale", n.recipient_scale},
              {"donor_mean", n.donor_mean},
              {"donor_scale", n.donor_scale},
              {"zero_variance_features", n.zero_variance_features}};
}

data::Normalization normalization_from_json(const json& j) {
  try {
    data::Normalization n;
    n.recipient_mean = j.at("recipient_mean").get<std::vector<double>>();
    n.recipient_scale = j.at("recipient_scale").get<std::vector<double>>();
    n.donor_mean = j.at("donor_mean").get<std::vector<double>>();
    n.donor_scale = j.at("donor_scale").get<std::vector<double>>();
    n.zero_variance_features = j.value("zero_variance_features", std::vector<std::string>{});
    return n;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("normalization: ") + e.what());
  }
}

json make_envelope(const std::string& kind) {
  return json{{"format", kModelFormat}, {"kind", kind}};
}

std::string envelope_kind(const json& j) {
  if (!j.is_object() || j.value("format", std::string{}) != kModelFormat) {
    throw ConfigError(std::string("model file: expected format \"") + kModelFormat + "\"");
  }
  if (!j.contains("kind") || !j["kind"].is_string()) {
    throw ConfigError("model file: missing kind");
  }
  return j["kind"].get<std::string>();
}

void check_envelope(const json& j, const std::string& kind) {
  const auto found = envelope_kind(j);
  if (found != kind) {
    throw ConfigError("model file: expected kind \"" + kind + "\", found \"" + found + "\"");
  }
}

json model_to_json(const MatchRepModel& model) {
  json j = make_envelope("matchrep");
  j["config"] = model.config.to_json();
  j["trained"] = model.trained;
  j["y_shift"] = model.y_shift;
  j["y_scale"] = model.y_scale;
  j["donor_map"] = {{"encoder", net_to_json(model.donor_map.encoder)},
                    {"decoder", net_to_json(model.donor_map.decoder)},
                    {"centers", matrix_to_json(model.donor_map.centers)},
                    {"alias", model.donor_map.alias}};
  j["phi"] = net_to_json(model.encoder.net);
  json heads = json::array();
  for (const auto& h : model.predictor.heads) heads.push_back(net_to_json(h));
  j["predictor"] = {{"trunk", net_to_json(model.predictor.trunk)}, {"heads", std::move(heads)}};
  j["normalization"] =
      model.normalization ? normalization_to_json(*model.normalization) : json(nullptr);
  return j;
}

MatchRepModel model_from_json(const json& j) {
  check_envelope(j, "matchrep");
  try {
    MatchRepModel m;
    m.config = TrainConfig::from_json(j.at("config"));
    m.trained = j.at("trained").get<bool>();
    m.y_shift = j.at("y_shift").get<double>();
    m.y_scale = j.at("y_scale").get<double>();
    const auto& dm = j.at("donor_map");
    m.donor_map.encoder = net_from_json(dm.at("encoder"));
    m.donor_map.decoder = net_from_json(dm.at("decoder"));
    m.donor_map.centers = matrix_from_json(dm.at("centers"));
    m.donor_map.alias = dm.at("alias").get<std::vector<std::size_t>>();
    m.encoder.net = net_from_json(j.at("phi"));
    m.predictor.trunk = net_from_json(j.at("predictor").at("trunk"));
    for (const auto& h : j.at("predictor").at("heads")) m.predictor.heads.push_back(net_from_json(h));
    if (!j.at("normalization").is_null()) {
      m.normalization = normalization_from_json(j.at("normalization"));
    }
    const std::size_t k = m.donor_map.centers.rows();
    if (k != m.config.k || m.predictor.heads.size() != k || m.donor_map.alias.size() != k) {
      throw ConfigError("model file: inconsistent number of donor types");
    }
    for (std::size_t a : m.donor_map.alias) {
      if (a >= k) throw ConfigError("model file: alias out of range");
    }
    if (m.encoder.net.output_dim() != m.predictor.trunk.input_dim() ||
        m.donor_map.encoder.output_dim() != m.donor_map.centers.cols()) {
      throw ConfigError("model file: layer widths do not chain");
    }
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model file: ") + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void save_model(const std::filesystem::path& path, const MatchRepModel& model) {
  write_json_file(path, model_to_json(model));
}

MatchRepModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_json_file(path));
}

}  // namespace matchrep::model
