#pragma once
// In-memory dataset of observed donor-recipient matches.
//
// Type labels are 0-based in memory (recipient type m, donor type k); files
// written for people use the 1-based convention.

#include <optional>
#include <string>
#include <vector>

#include "matchrep/numkit/matrix.hpp"

namespace matchrep::data {

struct MatchRecord {
  std::vector<double> recipient;
  std::vector<double> donor;
  double outcome = 0.0;  // survival, days
  // Synthetic / semi-synthetic ground truth.
  std::optional<std::vector<double>> true_potentials;
  std::optional<double> untreated_survival;
  std::optional<int> true_recipient_type;
  std::optional<int> true_donor_type;

  friend bool operator==(const MatchRecord&, const MatchRecord&) = default;
};

struct Schema {
  std::vector<std::string> recipient_features;
  std::vector<std::string> donor_features;

  std::size_t recipient_dim() const noexcept { return recipient_features.size(); }
  std::size_t donor_dim() const noexcept { return donor_features.size(); }

  friend bool operator==(const Schema&, const Schema&) = default;
};

// Per-feature affine statistics fitted on a training split.
struct Normalization {
  std::vector<double> recipient_mean, recipient_scale;
  std::vector<double> donor_mean, donor_scale;
  // Feature names whose training variance was zero (scale forced to 1).
  std::vector<std::string> zero_variance_features;

  void apply(MatchRecord& record) const;
  void invert(MatchRecord& record) const;

  friend bool operator==(const Normalization&, const Normalization&) = default;
};

class Dataset {
 public:
  Dataset() = default;
  Dataset(Schema schema, std::vector<MatchRecord> records);

  const Schema& schema() const noexcept { return schema_; }
  const std::vector<MatchRecord>& records() const noexcept { return records_; }
  const MatchRecord& operator[](std::size_t i) const { return records_[i]; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  const std::optional<Normalization>& normalization() const noexcept { return normalization_; }
  void set_normalization(Normalization n) { normalization_ = std::move(n); }

  // All records carry potentials, untreated survival and a donor type label.
  bool has_ground_truth() const noexcept;
  // Number of potential outcomes per record (0 without ground truth).
  std::size_t potential_count() const noexcept;

  num::Matrix recipient_matrix() const;
  num::Matrix donor_matrix() const;
  std::vector<double> outcomes() const;

  num::Matrix recipient_matrix(const std::vector<std::size_t>& rows) const;
  num::Matrix donor_matrix(const std::vector<std::size_t>& rows) const;
  std::vector<double> outcomes(const std::vector<std::size_t>& rows) const;

  Dataset subset(const std::vector<std::size_t>& rows) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  void validate() const;

  Schema schema_;
  std::vector<MatchRecord> records_;
  std::optional<Normalization> normalization_;
};

}  // namespace matchrep::data
