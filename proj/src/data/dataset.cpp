#include "matchrep/data/dataset.hpp"

#include <cmath>

#include "matchrep/error.hpp"

namespace matchrep::data {

void Normalization::apply(MatchRecord& record) const {
  for (std::size_t j = 0; j < record.recipient.size(); ++j) {
    record.recipient[j] = (record.recipient[j] - recipient_mean[j]) / recipient_scale[j];
  }
  for (std::size_t j = 0; j < record.donor.size(); ++j) {
    record.donor[j] = (record.donor[j] - donor_mean[j]) / donor_scale[j];
  }
}

void Normalization::invert(MatchRecord& record) const {
  for (std::size_t j = 0; j < record.recipient.size(); ++j) {
    record.recipient[j] = record.recipient[j] * recipient_scale[j] + recipient_mean[j];
  }
  for (std::size_t j = 0; j < record.donor.size(); ++j) {
    record.donor[j] = record.donor[j] * donor_scale[j] + donor_mean[j];
  }
}

Dataset::Dataset(Schema schema, std::vector<MatchRecord> records)
    : schema_(std::move(schema)), records_(std::move(records)) {
  validate();
}

void Dataset::validate() const {
  std::optional<std::size_t> k;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.recipient.size() != schema_.recipient_dim() || r.donor.size() != schema_.donor_dim()) {
      throw InvalidInputError("record " + std::to_string(i) + " does not match schema dimensions");
    }
    if (!std::isfinite(r.outcome)) {
      throw InvalidInputError("record " + std::to_string(i) + " has a non-finite outcome");
    }
    if (r.true_potentials) {
      if (k && *k != r.true_potentials->size()) {
        throw InvalidInputError("record " + std::to_string(i) +
                                " has a potential vector of inconsistent length");
      }
      k = r.true_potentials->size();
    }
  }
}

bool Dataset::has_ground_truth() const noexcept {
  if (records_.empty()) return false;
  for (const auto& r : records_) {
    if (!r.true_potentials || !r.untreated_survival || !r.true_donor_type) return false;
  }
  return true;
}

std::size_t Dataset::potential_count() const noexcept {
  if (records_.empty() || !records_.front().true_potentials) return 0;
  return records_.front().true_potentials->size();
}

num::Matrix Dataset::recipient_matrix() const {
  num::Matrix m(records_.size(), schema_.recipient_dim());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    std::copy(records_[i].recipient.begin(), records_[i].recipient.end(), m.row(i).begin());
  }
  return m;
}

num::Matrix Dataset::donor_matrix() const {
  num::Matrix m(records_.size(), schema_.donor_dim());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    std::copy(records_[i].donor.begin(), records_[i].donor.end(), m.row(i).begin());
  }
  return m;
}

std::vector<double> Dataset::outcomes() const {
  std::vector<double> y(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) y[i] = records_[i].outcome;
  return y;
}

num::Matrix Dataset::recipient_matrix(const std::vector<std::size_t>& rows) const {
  num::Matrix m(rows.size(), schema_.recipient_dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& src = records_.at(rows[i]).recipient;
    std::copy(src.begin(), src.end(), m.row(i).begin());
  }
  return m;
}

num::Matrix Dataset::donor_matrix(const std::vector<std::size_t>& rows) const {
  num::Matrix m(rows.size(), schema_.donor_dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& src = records_.at(rows[i]).donor;
    std::copy(src.begin(), src.end(), m.row(i).begin());
  }
  return m;
}

std::vector<double> Dataset::outcomes(const std::vector<std::size_t>& rows) const {
  std::vector<double> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) y[i] = records_.at(rows[i]).outcome;
  return y;
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  std::vector<MatchRecord> picked;
  picked.reserve(rows.size());
  for (auto i : rows) picked.push_back(records_.at(i));
  Dataset out(schema_, std::move(picked));
  out.normalization_ = normalization_;
  return out;
}

}  // namespace matchrep::data
