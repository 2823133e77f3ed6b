#pragma once
#include <cstdint>
#include <vector>

#include "matchrep/data/dataset.hpp"

namespace matchrep::data {

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;

  friend bool operator==(const SplitIndices&, const SplitIndices&) = default;
};

// Uniform random permutation of 0..n-1 under `seed`; the first
// round(fraction * n) indices train, the rest validate. Requires n >= 10.
SplitIndices split(std::size_t n, double fraction, std::uint64_t seed);
SplitIndices split(const Dataset& dataset, double fraction, std::uint64_t seed);

}  // namespace matchrep::data
