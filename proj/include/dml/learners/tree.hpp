#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "dml/rng.hpp"

namespace dml {

struct TreeNode {
  int feature = -1;  // -1: leaf
  double threshold = 0.0;
  double value = 0.0;
  int left = -1;
  int right = -1;
};

class RegressionTree {
 public:
  double predict_row(const Eigen::MatrixXd& X, Eigen::Index r) const {
    int id = 0;
    while (nodes_[static_cast<std::size_t>(id)].feature >= 0) {
      const TreeNode& nd = nodes_[static_cast<std::size_t>(id)];
      id = X(r, nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
    return nodes_[static_cast<std::size_t>(id)].value;
  }

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r) out[r] = predict_row(X, r);
    return out;
  }

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::vector<TreeNode>& nodes() { return nodes_; }

 private:
  std::vector<TreeNode> nodes_;
};

struct TreeOptions {
  int max_depth = -1;  // -1: grow until min_leaf / purity stops
  int min_leaf = 1;    // minimum weighted samples per child
  int mtry = -1;       // features sampled per node; -1: all
};

// Row indices sorted per feature, computed once per design matrix and shared
// across every tree grown on it.
class FeaturePresort {
 public:
  explicit FeaturePresort(const Eigen::MatrixXd& X);
  const Eigen::MatrixXd& X() const { return x_; }
  const std::vector<int>& order(int feature) const {
    return order_[static_cast<std::size_t>(feature)];
  }

 private:
  const Eigen::MatrixXd& x_;
  std::vector<std::vector<int>> order_;
};

// Exact greedy CART on squared error, grown level-wise over the presorted
// feature lists. `weight` carries bootstrap multiplicities (0 = out of bag).
RegressionTree grow_tree(const FeaturePresort& presort, const Eigen::VectorXd& y,
                         const std::vector<int>& weight, const TreeOptions& opt, Rng& rng);

}  // namespace dml
