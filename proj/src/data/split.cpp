#include "matchrep/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "matchrep/error.hpp"
#include "matchrep/numkit/rng.hpp"

namespace matchrep::data {

SplitIndices split(std::size_t n, double fraction, std::uint64_t seed) {
  if (n < 10) {
    throw InsufficientDataError("split needs at least 10 records, got " + std::to_string(n));
  }
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw InvalidInputError("split fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  num::RngStream rng(seed);
  rng.shuffle(order);

  auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<long>(n_train));
  out.validation.assign(order.begin() + static_cast<long>(n_train), order.end());
  return out;
}

SplitIndices split(const Dataset& dataset, double fraction, std::uint64_t seed) {
  return split(dataset.size(), fraction, seed);
}

}  // namespace matchrep::data
