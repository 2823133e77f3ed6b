#pragma once
// Schema-driven CSV ingestion.
//
// Numeric columns with any missing cell (empty or "NA") are imputed with the
// mean of the observed rows and gain a companion "<column>__missing" 0/1
// indicator feature. Categorical columns are one-hot encoded against the
// category list declared in the schema config, one "<column>=<category>"
// feature per category.

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "matchrep/data/dataset.hpp"
#include "json.hpp"

namespace matchrep::data {

struct SchemaConfig {
  std::vector<std::string> recipient_columns;
  std::vector<std::string> donor_columns;
  std::string outcome_column;
  std::map<std::string, std::vector<std::string>> categorical;

  static SchemaConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static SchemaConfig load(const std::string& path);
};

Dataset load_csv(std::istream& in, const SchemaConfig& config);
Dataset load_csv(const std::string& path, const SchemaConfig& config);

// Writes the raw columns named by `config`, inverting the one-hot encoding and
// blanking imputed cells, so load_csv(write_csv(d)) reproduces d.
void write_csv(const Dataset& dataset, const SchemaConfig& config, std::ostream& out);
void write_csv(const Dataset& dataset, const SchemaConfig& config, const std::string& path);

// Ground-truth side file: record,m,k,y_1..y_K,untreated with 1-based types.
void write_ground_truth(const Dataset& dataset, std::ostream& out);
void attach_ground_truth(Dataset& dataset, std::istream& in);
void attach_ground_truth(Dataset& dataset, const std::string& path);

// Minimal RFC 4180 field splitting (quoted fields, doubled quotes).
std::vector<std::string> split_csv_line(const std::string& line);

// Shortest round-trippable text for a double.
std::string format_double(double v);

}  // namespace matchrep::data
