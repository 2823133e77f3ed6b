#include "matchrep/data/normalize.hpp"

#include <algorithm>
#include <cmath>

#include "matchrep/error.hpp"

namespace matchrep::data {
namespace {

void moments(const Dataset& ds, const std::vector<std::size_t>& rows, bool donor,
             const std::vector<std::string>& names, std::vector<double>& mean,
             std::vector<double>& scale, std::vector<std::string>& constant) {
  const std::size_t d = names.size();
  mean.assign(d, 0.0);
  scale.assign(d, 0.0);
  for (auto i : rows) {
    const auto& x = donor ? ds[i].donor : ds[i].recipient;
    for (std::size_t j = 0; j < d; ++j) mean[j] += x[j];
  }
  const double n = static_cast<double>(rows.size());
  for (auto& m : mean) m /= n;
  for (auto i : rows) {
    const auto& x = donor ? ds[i].donor : ds[i].recipient;
    for (std::size_t j = 0; j < d; ++j) scale[j] += (x[j] - mean[j]) * (x[j] - mean[j]);
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(scale[j] / n);
    if (sd <= 1e-12 * std::max(1.0, std::abs(mean[j]))) {
      scale[j] = 1.0;
      constant.push_back(names[j]);
    } else {
      scale[j] = sd;
    }
  }
}

}  // namespace

Normalization fit_normalization(const Dataset& dataset, const std::vector<std::size_t>& rows) {
  if (rows.empty()) throw InsufficientDataError("normalization needs at least one row");
  for (auto i : rows) {
    if (i >= dataset.size()) throw InvalidInputError("normalization row index out of range");
  }
  Normalization n;
  const auto& s = dataset.schema();
  moments(dataset, rows, false, s.recipient_features, n.recipient_mean, n.recipient_scale,
          n.zero_variance_features);
  moments(dataset, rows, true, s.donor_features, n.donor_mean, n.donor_scale,
          n.zero_variance_features);
  return n;
}

Dataset apply_normalization(const Dataset& dataset, const Normalization& n) {
  if (dataset.normalization()) throw UsageError("dataset is already normalized");
  std::vector<MatchRecord> records = dataset.records();
  for (auto& r : records) n.apply(r);
  Dataset out(dataset.schema(), std::move(records));
  out.set_normalization(n);
  return out;
}

Dataset normalize_fit_transform(const Dataset& dataset, const SplitIndices& split) {
  return apply_normalization(dataset, fit_normalization(dataset, split.train));
}

Dataset denormalize(const Dataset& dataset) {
  if (!dataset.normalization()) return dataset;
  std::vector<MatchRecord> records = dataset.records();
  for (auto& r : records) dataset.normalization()->invert(r);
  return Dataset(dataset.schema(), std::move(records));
}

}  // namespace matchrep::data
