#pragma once
#include <vector>

#include "matchrep/data/dataset.hpp"
#include "matchrep/data/split.hpp"

namespace matchrep::data {

// Per-feature mean and population standard deviation over `rows`. Features
// with zero variance get scale 1 and are listed in zero_variance_features.
Normalization fit_normalization(const Dataset& dataset, const std::vector<std::size_t>& rows);

// Applies `n` to every record's features. Outcomes are left in days.
Dataset apply_normalization(const Dataset& dataset, const Normalization& n);

// Statistics from split.train, applied to all rows.
Dataset normalize_fit_transform(const Dataset& dataset, const SplitIndices& split);

// Undoes the attached normalization; returns the dataset unchanged if none.
Dataset denormalize(const Dataset& dataset);

}  // namespace matchrep::data
