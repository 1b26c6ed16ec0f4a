#include "le2/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "le2/rng.hpp"

namespace le2 {
namespace {

uint64_t hash_bytes(const void* data, std::size_t len, uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct TreeBuilder {
  const std::vector<double>& X;
  const std::vector<int>& y;
  int dim;
  const ForestHyperparams& hp;
  int k_features;
  RngStream rng;
  std::vector<TreeNode> nodes;
  std::vector<int> feature_pool;
  std::vector<std::pair<double, int>> sorted;  // (value, label) scratch

  double x(int row, int f) const { return X[static_cast<std::size_t>(row) * dim + f]; }

  int grow(std::vector<int>& rows, int begin, int end, int depth) {
    const int size = end - begin;
    int pos = 0;
    for (int i = begin; i < end; ++i) pos += y[rows[i]];

    auto make_leaf = [&]() {
      TreeNode leaf;
      leaf.value = static_cast<double>(pos) / static_cast<double>(size);
      nodes.push_back(leaf);
      return static_cast<int>(nodes.size()) - 1;
    };

    if (pos == 0 || pos == size || depth >= hp.max_depth || size < 2 * hp.min_samples_leaf)
      return make_leaf();

    // random feature subset, fresh partial Fisher-Yates per node
    std::iota(feature_pool.begin(), feature_pool.end(), 0);
    for (int j = 0; j < k_features; ++j) {
      int swap_with = j + rng.uniform_int(dim - j);
      std::swap(feature_pool[j], feature_pool[swap_with]);
    }

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_weighted = std::numeric_limits<double>::infinity();

    for (int j = 0; j < k_features; ++j) {
      const int f = feature_pool[j];
      sorted.resize(size);
      for (int i = 0; i < size; ++i) {
        int row = rows[begin + i];
        sorted[i] = {x(row, f), y[row]};
      }
      std::sort(sorted.begin(), sorted.end());

      int left_pos = 0;
      for (int i = 1; i < size; ++i) {
        left_pos += sorted[i - 1].second;
        if (i < hp.min_samples_leaf || size - i < hp.min_samples_leaf) continue;
        if (!(sorted[i - 1].first < sorted[i].first)) continue;  // split only between distinct values
        const double nl = i, nr = size - i;
        const double pl = left_pos, pr = pos - left_pos;
        // weighted Gini, common 1/size factor dropped
        double wl = nl - (pl * pl + (nl - pl) * (nl - pl)) / nl;
        double wr = nr - (pr * pr + (nr - pr) * (nr - pr)) / nr;
        double w = wl + wr;
        if (w < best_weighted) {
          best_weighted = w;
          best_feature = f;
          double lo = sorted[i - 1].first, hi = sorted[i].first;
          double mid = lo + 0.5 * (hi - lo);
          if (!(mid > lo) || mid >= hi) mid = lo;  // keep "x <= mid" equal to the counted split
          best_threshold = mid;
        }
      }
    }

    if (best_feature < 0) return make_leaf();

    auto mid_it = std::stable_partition(
        rows.begin() + begin, rows.begin() + end,
        [&](int row) { return x(row, best_feature) <= best_threshold; });
    int mid = static_cast<int>(mid_it - rows.begin());
    if (mid == begin || mid == end) return make_leaf();  // numeric safety

    int self = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[self].feature = best_feature;
    nodes[self].threshold = best_threshold;
    int left = grow(rows, begin, mid, depth + 1);
    int right = grow(rows, mid, end, depth + 1);
    nodes[self].left = left;
    nodes[self].right = right;
    return self;
  }
};

}  // namespace

RandomForest RandomForest::fit(const std::vector<double>& X_rows, const std::vector<int>& labels,
                               int dim, const ForestHyperparams& hp, uint64_t seed) {
  const std::size_t n = labels.size();
  if (n == 0) throw std::invalid_argument("RandomForest::fit: empty training set");
  if (dim <= 0 || X_rows.size() != n * static_cast<std::size_t>(dim))
    throw std::invalid_argument("RandomForest::fit: feature matrix shape mismatch");
  if (hp.n_trees <= 0 || hp.max_depth <= 0 || hp.min_samples_leaf <= 0)
    throw std::invalid_argument("RandomForest::fit: bad hyperparameters");

  RandomForest forest;
  forest.dim_ = dim;

  int pos = 0;
  for (int l : labels) pos += l;
  forest.degenerate_ = (pos == 0 || pos == static_cast<int>(n));

  // Canonical row order by content hash (ties broken by full content) makes the
  // fit independent of the order examples arrive in.
  std::vector<uint64_t> key(n);
  for (std::size_t i = 0; i < n; ++i) {
    uint64_t h = hash_bytes(&X_rows[i * dim], sizeof(double) * dim, 0xcbf29ce484222325ULL);
    key[i] = hash_bytes(&labels[i], sizeof(int), h);
  }
  std::vector<int> canonical(n);
  std::iota(canonical.begin(), canonical.end(), 0);
  std::sort(canonical.begin(), canonical.end(), [&](int a, int b) {
    if (key[a] != key[b]) return key[a] < key[b];
    int c = std::memcmp(&X_rows[static_cast<std::size_t>(a) * dim],
                        &X_rows[static_cast<std::size_t>(b) * dim], sizeof(double) * dim);
    if (c != 0) return c < 0;
    return labels[a] < labels[b];
  });

  int k = hp.features_per_split > 0 ? hp.features_per_split
                                    : static_cast<int>(std::ceil(std::sqrt(dim)));
  k = std::min(k, dim);

  forest.trees_.reserve(hp.n_trees);
  std::vector<int> rows(n);
  for (int t = 0; t < hp.n_trees; ++t) {
    TreeBuilder builder{X_rows, labels, dim, hp, k, RngStream(derive_seed(seed, "tree", t)),
                        {},     {},     {}};
    builder.feature_pool.resize(dim);
    if (hp.bootstrap) {
      for (std::size_t i = 0; i < n; ++i)
        rows[i] = canonical[builder.rng.uniform_int(static_cast<int>(n))];
    } else {
      rows = canonical;
    }
    builder.nodes.reserve(64);
    builder.grow(rows, 0, static_cast<int>(n), 0);
    forest.trees_.push_back(std::move(builder.nodes));
  }
  return forest;
}

double RandomForest::score(std::span<const double> features) const {
  if (!fitted()) throw std::logic_error("RandomForest: not fitted");
  if (static_cast<int>(features.size()) != dim_)
    throw std::invalid_argument("RandomForest::score: feature dimension mismatch");
  double total = 0.0;
  for (const std::vector<TreeNode>& tree : trees_) {
    int i = 0;
    while (tree[i].feature >= 0)
      i = features[tree[i].feature] <= tree[i].threshold ? tree[i].left : tree[i].right;
    total += tree[i].value;
  }
  return total / static_cast<double>(trees_.size());
}

int RandomForest::predict(std::span<const double> features) const {
  return score(features) > 0.5 ? 1 : 0;
}

std::string RandomForest::to_json_string() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["dim"] = dim_;
  j["degenerate"] = degenerate_;
  j["n_trees"] = trees_.size();
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : trees_) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : tree)
      nodes.push_back({n.feature, n.left, n.right, n.threshold, n.value});
    trees.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees);
  return j.dump();
}

RandomForest RandomForest::from_parts(std::vector<std::vector<TreeNode>> trees, int dim,
                                      bool degenerate) {
  RandomForest f;
  f.trees_ = std::move(trees);
  f.dim_ = dim;
  f.degenerate_ = degenerate;
  return f;
}

RandomForest RandomForest::from_json_string(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  RandomForest f;
  f.dim_ = j.at("dim").get<int>();
  f.degenerate_ = j.at("degenerate").get<bool>();
  for (const auto& tree : j.at("trees")) {
    std::vector<TreeNode> nodes;
    nodes.reserve(tree.size());
    for (const auto& n : tree) {
      TreeNode node;
      node.feature = n.at(0).get<int32_t>();
      node.left = n.at(1).get<int32_t>();
      node.right = n.at(2).get<int32_t>();
      node.threshold = n.at(3).get<double>();
      node.value = n.at(4).get<double>();
      nodes.push_back(node);
    }
    f.trees_.push_back(std::move(nodes));
  }
  if (f.trees_.empty()) throw std::runtime_error("RandomForest: empty model in checkpoint");
  return f;
}

}  // namespace le2
