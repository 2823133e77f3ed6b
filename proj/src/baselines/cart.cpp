#include "matchrep/baselines/cart.hpp"

#include <algorithm>
#include <numeric>

#include "matchrep/error.hpp"

namespace matchrep::baselines {

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Best split of `rows` by reduction in summed squared error. Candidate
// thresholds are midpoints between consecutive distinct values; the first
// feature and smallest threshold win ties.
Split best_split(const num::Matrix& x, const std::vector<double>& y,
                 const std::vector<std::size_t>& rows, std::size_t min_leaf) {
  Split best;
  const std::size_t n = rows.size();
  if (n < 2 * min_leaf) return best;
  double total = 0.0, total_sq = 0.0;
  for (auto r : rows) total += y[r], total_sq += y[r] * y[r];
  const double parent_sse = total_sq - total * total / static_cast<double>(n);

  std::vector<std::size_t> order(rows);
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
    double left_sum = 0.0, left_sq = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double v = y[order[i]];
      left_sum += v;
      left_sq += v * v;
      const std::size_t nl = i + 1, nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      const double xl = x(order[i], f), xr = x(order[i + 1], f);
      if (!(xl < xr)) continue;
      const double right_sum = total - left_sum, right_sq = total_sq - left_sq;
      const double sse = (left_sq - left_sum * left_sum / static_cast<double>(nl)) +
                         (right_sq - right_sum * right_sum / static_cast<double>(nr));
      const double gain = parent_sse - sse;
      if (gain > best.gain + 1e-12 * std::max(1.0, parent_sse)) {
        best = {static_cast<int>(f), 0.5 * (xl + xr), gain};
      }
    }
  }
  return best;
}

}  // namespace

RegressionTree RegressionTree::fit(const num::Matrix& x, const std::vector<double>& y,
                                   const TreeOptions& options) {
  if (x.rows() != y.size() || y.empty()) {
    throw InvalidInputError("regression tree: need matching, non-empty X and y");
  }
  if (options.min_leaf == 0) throw InvalidInputError("regression tree: min_leaf must be >= 1");
  RegressionTree tree;
  tree.input_dim_ = x.cols();

  struct Pending {
    std::size_t node;
    std::vector<std::size_t> rows;
    std::size_t depth;
  };
  std::vector<std::size_t> all(x.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  tree.nodes_.push_back({});
  std::vector<Pending> stack{{0, std::move(all), 0}};
  while (!stack.empty()) {
    Pending p = std::move(stack.back());
    stack.pop_back();
    double sum = 0.0;
    for (auto r : p.rows) sum += y[r];
    tree.nodes_[p.node].value = sum / static_cast<double>(p.rows.size());
    if (p.depth >= options.max_depth) continue;
    const Split s = best_split(x, y, p.rows, options.min_leaf);
    if (s.feature < 0) continue;
    std::vector<std::size_t> left, right;
    for (auto r : p.rows) {
      (x(r, static_cast<std::size_t>(s.feature)) <= s.threshold ? left : right).push_back(r);
    }
    const std::size_t li = tree.nodes_.size();
    tree.nodes_.push_back({});
    tree.nodes_.push_back({});
    auto& node = tree.nodes_[p.node];
    node.feature = s.feature;
    node.threshold = s.threshold;
    node.left = li;
    node.right = li + 1;
    stack.push_back({li + 1, std::move(right), p.depth + 1});
    stack.push_back({li, std::move(left), p.depth + 1});
  }
  return tree;
}

double RegressionTree::predict(std::span<const double> x) const {
  if (nodes_.empty()) throw UsageError("regression tree is not fitted");
  if (x.size() != input_dim_) throw InvalidInputError("regression tree: feature width mismatch");
  std::size_t at = 0;
  while (nodes_[at].feature >= 0) {
    const auto& n = nodes_[at];
    at = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes_[at].value;
}

std::vector<double> RegressionTree::predict(const num::Matrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict(x.row(r));
  return out;
}

std::size_t RegressionTree::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty() && !nodes_.empty()) {
    auto [at, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (nodes_[at].feature >= 0) {
      stack.push_back({nodes_[at].left, d + 1});
      stack.push_back({nodes_[at].right, d + 1});
    }
  }
  return best;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

nlohmann::json RegressionTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : nodes_) {
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right},
                     {"value", n.value}});
  }
  return {{"input_dim", input_dim_}, {"nodes", std::move(nodes)}};
}

RegressionTree RegressionTree::from_json(const nlohmann::json& j) {
  try {
    RegressionTree t;
    t.input_dim_ = j.at("input_dim").get<std::size_t>();
    for (const auto& n : j.at("nodes")) {
      t.nodes_.push_back({n.at("feature").get<int>(), n.at("threshold").get<double>(),
                          n.at("left").get<std::size_t>(), n.at("right").get<std::size_t>(),
                          n.at("value").get<double>()});
    }
    for (const auto& n : t.nodes_) {
      if (n.feature >= 0 && (static_cast<std::size_t>(n.feature) >= t.input_dim_ ||
                             n.left >= t.nodes_.size() || n.right >= t.nodes_.size())) {
        throw ConfigError("regression tree: node references out of range");
      }
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("regression tree: ") + e.what());
  }
}

}  // namespace matchrep::baselines
