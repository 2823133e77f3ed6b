#pragma once
#include <span>
#include <vector>

#include "json.hpp"
#include "matchrep/numkit/matrix.hpp"

namespace matchrep::baselines {

struct TreeOptions {
  std::size_t max_depth = 8;
  std::size_t min_leaf = 16;
};

// Binary regression tree grown greedily by variance reduction. Internal nodes
// send x[feature] <= threshold to the left child.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::size_t left = 0, right = 0;
    double value = 0.0;  // mean outcome of the training rows reaching the node

    friend bool operator==(const Node&, const Node&) = default;
  };

  static RegressionTree fit(const num::Matrix& x, const std::vector<double>& y,
                            const TreeOptions& options = {});

  double predict(std::span<const double> x) const;
  std::vector<double> predict(const num::Matrix& x) const;

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const;
  std::size_t leaf_count() const;

  nlohmann::json to_json() const;
  static RegressionTree from_json(const nlohmann::json& j);

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

 private:
  std::vector<Node> nodes_;
  std::size_t input_dim_ = 0;
};

}  // namespace matchrep::baselines
