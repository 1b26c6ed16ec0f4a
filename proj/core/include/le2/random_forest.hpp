#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace le2 {

struct ForestHyperparams {
  int n_trees = 100;
  int max_depth = 12;
  int min_samples_leaf = 2;
  int features_per_split = 0;  // 0 -> ceil(sqrt(dim))
  bool bootstrap = true;
};

struct TreeNode {
  int32_t feature = -1;  // -1 marks a leaf
  int32_t left = -1;
  int32_t right = -1;
  double threshold = 0.0;
  double value = 0.0;  // leaf positive fraction
};

// CART-style random forest, binary labels, Gini splits over a random feature
// subset per node. Training is deterministic given (seed, hyperparameters) and
// invariant to example order: rows are canonicalized by content hash before any
// randomness is consumed, and bootstrap draws are keyed by (seed, tree index).
class RandomForest {
 public:
  RandomForest() = default;

  static RandomForest fit(const std::vector<double>& X_rows, const std::vector<int>& labels,
                          int dim, const ForestHyperparams& hp, uint64_t seed);

  bool fitted() const { return !trees_.empty(); }
  // Mean leaf positive fraction over trees.
  double score(std::span<const double> features) const;
  // score > 0.5; an exact tie votes negative.
  int predict(std::span<const double> features) const;

  bool degenerate() const { return degenerate_; }  // trained on a single class
  std::size_t n_trees() const { return trees_.size(); }
  int dim() const { return dim_; }
  const std::vector<std::vector<TreeNode>>& trees() const { return trees_; }

  std::string to_json_string() const;
  static RandomForest from_json_string(const std::string& text);
  static RandomForest from_parts(std::vector<std::vector<TreeNode>> trees, int dim,
                                 bool degenerate);

 private:
  std::vector<std::vector<TreeNode>> trees_;
  int dim_ = 0;
  bool degenerate_ = false;
};

}  // namespace le2
