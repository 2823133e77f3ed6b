#include "matchrep/data/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "matchrep/error.hpp"

namespace matchrep::data {
namespace {

constexpr const char* kMissingSuffix = "__missing";

bool is_missing(const std::string& cell) { return cell.empty() || cell == "NA"; }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

// How one raw column maps onto expanded feature slots.
struct ColumnPlan {
  std::string name;
  std::size_t source = 0;  // index in the CSV header
  bool categorical = false;
  std::vector<std::string> categories;
  bool has_missing = false;
  double fill = 0.0;  // imputation value
};

std::vector<std::string> expanded_names(const std::vector<ColumnPlan>& plans) {
  std::vector<std::string> names;
  for (const auto& p : plans) {
    if (p.categorical) {
      for (const auto& c : p.categories) names.push_back(p.name + "=" + c);
    } else {
      names.push_back(p.name);
      if (p.has_missing) names.push_back(p.name + kMissingSuffix);
    }
  }
  return names;
}

std::vector<double> encode_row(const std::vector<ColumnPlan>& plans,
                               const std::vector<std::string>& cells, std::size_t line_no) {
  std::vector<double> out;
  for (const auto& p : plans) {
    const std::string& cell = cells[p.source];
    if (p.categorical) {
      std::size_t hit = p.categories.size();
      for (std::size_t c = 0; c < p.categories.size(); ++c) {
        if (p.categories[c] == cell) hit = c;
      }
      if (hit == p.categories.size()) {
        throw IngestionError("row " + std::to_string(line_no) + ", column '" + p.name +
                             "': undeclared category '" + cell + "'");
      }
      for (std::size_t c = 0; c < p.categories.size(); ++c) out.push_back(c == hit ? 1.0 : 0.0);
    } else if (is_missing(cell)) {
      out.push_back(p.fill);
      out.push_back(1.0);
    } else {
      double v;
      if (!parse_double(cell, v)) {
        throw IngestionError("row " + std::to_string(line_no) + ", column '" + p.name +
                             "': unparseable value '" + cell + "'");
      }
      out.push_back(v);
      if (p.has_missing) out.push_back(0.0);
    }
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw InvalidInputError("format_double failed");
  return std::string(buf, ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

SchemaConfig SchemaConfig::from_json(const nlohmann::json& j) {
  SchemaConfig c;
  try {
    c.recipient_columns = j.at("recipient_columns").get<std::vector<std::string>>();
    c.donor_columns = j.at("donor_columns").get<std::vector<std::string>>();
    c.outcome_column = j.at("outcome_column").get<std::string>();
    if (j.contains("categorical")) {
      c.categorical = j.at("categorical").get<std::map<std::string, std::vector<std::string>>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("schema config: ") + e.what());
  }
  if (c.recipient_columns.empty() || c.donor_columns.empty() || c.outcome_column.empty()) {
    throw ConfigError("schema config needs recipient, donor and outcome columns");
  }
  return c;
}

nlohmann::json SchemaConfig::to_json() const {
  return nlohmann::json{{"recipient_columns", recipient_columns},
                        {"donor_columns", donor_columns},
                        {"outcome_column", outcome_column},
                        {"categorical", categorical}};
}

SchemaConfig SchemaConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema config '" + path + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("schema config '" + path + "': " + e.what());
  }
}

Dataset load_csv(std::istream& in, const SchemaConfig& config) {
  std::string line;
  if (!std::getline(in, line)) throw IngestionError("empty CSV: header row required");
  const auto header = split_csv_line(line);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index[header[i]] = i;

  auto locate = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw IngestionError("unknown column '" + name + "' (not in header)");
    return it->second;
  };
  for (const auto& [name, cats] : config.categorical) {
    (void)cats;
    const bool used = std::count(config.recipient_columns.begin(), config.recipient_columns.end(),
                                 name) +
                      std::count(config.donor_columns.begin(), config.donor_columns.end(), name);
    if (!used) throw IngestionError("categorical column '" + name + "' is not a feature column");
  }
  auto make_plans = [&](const std::vector<std::string>& cols) {
    std::vector<ColumnPlan> plans;
    for (const auto& name : cols) {
      ColumnPlan p;
      p.name = name;
      p.source = locate(name);
      if (auto it = config.categorical.find(name); it != config.categorical.end()) {
        p.categorical = true;
        p.categories = it->second;
      }
      plans.push_back(std::move(p));
    }
    return plans;
  };
  auto recipient_plans = make_plans(config.recipient_columns);
  auto donor_plans = make_plans(config.donor_columns);
  const std::size_t outcome_idx = locate(config.outcome_column);

  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw IngestionError("row " + std::to_string(line_no) + ": expected " +
                           std::to_string(header.size()) + " cells, found " +
                           std::to_string(cells.size()));
    }
    rows.push_back(std::move(cells));
    line_numbers.push_back(line_no);
  }

  // Imputation statistics over the observed cells of each numeric column.
  for (auto* plans : {&recipient_plans, &donor_plans}) {
    for (auto& p : *plans) {
      if (p.categorical) continue;
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& cell = rows[r][p.source];
        if (is_missing(cell)) {
          p.has_missing = true;
          continue;
        }
        double v;
        if (!parse_double(cell, v)) {
          throw IngestionError("row " + std::to_string(line_numbers[r]) + ", column '" + p.name +
                               "': unparseable value '" + cell + "'");
        }
        sum += v;
        ++count;
      }
      if (p.has_missing && count == 0) {
        throw IngestionError("column '" + p.name + "' has no observed values to impute from");
      }
      p.fill = count ? sum / static_cast<double>(count) : 0.0;
    }
  }

  Schema schema{expanded_names(recipient_plans), expanded_names(donor_plans)};
  std::vector<MatchRecord> records;
  records.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    MatchRecord rec;
    rec.recipient = encode_row(recipient_plans, rows[r], line_numbers[r]);
    rec.donor = encode_row(donor_plans, rows[r], line_numbers[r]);
    const auto& y = rows[r][outcome_idx];
    if (!parse_double(y, rec.outcome)) {
      throw IngestionError("row " + std::to_string(line_numbers[r]) + ", column '" +
                           config.outcome_column + "': unparseable outcome '" + y + "'");
    }
    records.push_back(std::move(rec));
  }
  return Dataset(std::move(schema), std::move(records));
}

Dataset load_csv(const std::string& path, const SchemaConfig& config) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV '" + path + "'");
  return load_csv(in, config);
}

void write_csv(const Dataset& dataset, const SchemaConfig& config, std::ostream& out) {
  const auto& schema = dataset.schema();
  auto feature_index = [](const std::vector<std::string>& names) {
    std::unordered_map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < names.size(); ++i) idx[names[i]] = i;
    return idx;
  };
  const auto r_idx = feature_index(schema.recipient_features);
  const auto o_idx = feature_index(schema.donor_features);

  std::vector<std::string> header = config.recipient_columns;
  header.insert(header.end(), config.donor_columns.begin(), config.donor_columns.end());
  header.push_back(config.outcome_column);
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << (i ? "," : "") << quote_if_needed(header[i]);
  }
  out << '\n';

  auto raw_cell = [&](const std::string& column, const std::vector<double>& values,
                      const std::unordered_map<std::string, std::size_t>& idx) -> std::string {
    if (auto it = config.categorical.find(column); it != config.categorical.end()) {
      for (const auto& cat : it->second) {
        auto f = idx.find(column + "=" + cat);
        if (f == idx.end()) throw InvalidInputError("dataset lacks one-hot feature for " + column);
        if (values[f->second] == 1.0) return cat;
      }
      throw InvalidInputError("no active category for column '" + column + "'");
    }
    auto f = idx.find(column);
    if (f == idx.end()) throw InvalidInputError("dataset lacks feature '" + column + "'");
    if (auto m = idx.find(column + kMissingSuffix); m != idx.end() && values[m->second] == 1.0) {
      return "";
    }
    return format_double(values[f->second]);
  };

  for (const auto& rec : dataset.records()) {
    bool first = true;
    for (const auto& c : config.recipient_columns) {
      out << (first ? "" : ",") << quote_if_needed(raw_cell(c, rec.recipient, r_idx));
      first = false;
    }
    for (const auto& c : config.donor_columns) {
      out << "," << quote_if_needed(raw_cell(c, rec.donor, o_idx));
    }
    out << "," << format_double(rec.outcome) << '\n';
  }
}

void write_csv(const Dataset& dataset, const SchemaConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_csv(dataset, config, out);
  if (!out) throw IoError("write failed for '" + path + "'");
}

void write_ground_truth(const Dataset& dataset, std::ostream& out) {
  if (!dataset.has_ground_truth()) throw UnsupportedDatasetError("dataset has no ground truth");
  const std::size_t k = dataset.potential_count();
  out << "record,m,k";
  for (std::size_t j = 0; j < k; ++j) out << ",y_" << j + 1;
  out << ",untreated\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& r = dataset[i];
    out << i << ',' << (r.true_recipient_type ? std::to_string(*r.true_recipient_type + 1) : "")
        << ',' << *r.true_donor_type + 1;
    for (double y : *r.true_potentials) out << ',' << format_double(y);
    out << ',' << format_double(*r.untreated_survival) << '\n';
  }
}

void attach_ground_truth(Dataset& dataset, std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IngestionError("empty ground-truth file");
  const auto header = split_csv_line(line);
  if (header.size() < 5 || header[0] != "record" || header[1] != "m" || header[2] != "k" ||
      header.back() != "untreated") {
    throw IngestionError("ground-truth header must be record,m,k,y_1..y_K,untreated");
  }
  const std::size_t k = header.size() - 4;
  std::vector<MatchRecord> records = dataset.records();
  std::vector<bool> seen(records.size(), false);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw IngestionError("ground truth row " + std::to_string(line_no) + ": wrong cell count");
    }
    std::vector<double> v(cells.size(), 0.0);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == 1 && cells[c].empty()) continue;
      if (!parse_double(cells[c], v[c])) {
        throw IngestionError("ground truth row " + std::to_string(line_no) + ", column '" +
                             header[c] + "': unparseable value '" + cells[c] + "'");
      }
    }
    const auto idx = static_cast<std::size_t>(v[0]);
    if (v[0] < 0 || idx >= records.size()) {
      throw IngestionError("ground truth row " + std::to_string(line_no) + ": record out of range");
    }
    auto& rec = records[idx];
    if (!cells[1].empty()) rec.true_recipient_type = static_cast<int>(v[1]) - 1;
    rec.true_donor_type = static_cast<int>(v[2]) - 1;
    if (*rec.true_donor_type < 0 || static_cast<std::size_t>(*rec.true_donor_type) >= k) {
      throw IngestionError("ground truth row " + std::to_string(line_no) + ": k out of range");
    }
    rec.true_potentials = std::vector<double>(v.begin() + 3, v.begin() + 3 + static_cast<long>(k));
    rec.untreated_survival = v.back();
    seen[idx] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw IngestionError("ground truth missing record " + std::to_string(i));
  }
  Dataset updated(dataset.schema(), std::move(records));
  if (dataset.normalization()) updated.set_normalization(*dataset.normalization());
  dataset = std::move(updated);
}

void attach_ground_truth(Dataset& dataset, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ground truth '" + path + "'");
  attach_ground_truth(dataset, in);
}

}  // namespace matchrep::data
