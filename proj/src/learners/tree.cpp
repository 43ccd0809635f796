#include "dml/learners/tree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace dml {

FeaturePresort::FeaturePresort(const Eigen::MatrixXd& X) : x_(X) {
  const int p = static_cast<int>(X.cols());
  const int n = static_cast<int>(X.rows());
  order_.resize(static_cast<std::size_t>(p));
  for (int f = 0; f < p; ++f) {
    auto& ord = order_[static_cast<std::size_t>(f)];
    ord.resize(static_cast<std::size_t>(n));
    std::iota(ord.begin(), ord.end(), 0);
    const auto col = X.col(f);
    std::sort(ord.begin(), ord.end(), [&col](int a, int b) {
      return col[a] < col[b] || (col[a] == col[b] && a < b);
    });
  }
}

namespace {

struct LevelSlot {
  int node_id = 0;
  double cnt = 0.0;  // weighted row count
  double sum = 0.0;  // weighted sum of y
  double sq = 0.0;   // weighted sum of y^2
  // best split found so far
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

// 64-bit mask words per node for the sampled feature subset.
class FeatureMask {
 public:
  FeatureMask(int p, int mtry) : words_((p + 63) / 64), all_(mtry < 0 || mtry >= p) {}

  void sample(std::vector<std::uint64_t>& storage, int p, int mtry, Rng& rng) {
    offset_ = storage.size();
    if (all_) return;
    storage.resize(offset_ + static_cast<std::size_t>(words_), 0);
    // Partial Fisher-Yates over feature ids.
    thread_local std::vector<int> pool;
    pool.resize(static_cast<std::size_t>(p));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < mtry; ++i) {
      const int j = i + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(p - i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
      const int f = pool[static_cast<std::size_t>(i)];
      storage[offset_ + static_cast<std::size_t>(f / 64)] |= 1ULL << (f % 64);
    }
  }

  bool test(const std::vector<std::uint64_t>& storage, int f) const {
    if (all_) return true;
    return (storage[offset_ + static_cast<std::size_t>(f / 64)] >> (f % 64)) & 1ULL;
  }

 private:
  int words_;
  bool all_;
  std::size_t offset_ = 0;
};

}  // namespace

RegressionTree grow_tree(const FeaturePresort& presort, const Eigen::VectorXd& y,
                         const std::vector<int>& weight, const TreeOptions& opt, Rng& rng) {
  const Eigen::MatrixXd& X = presort.X();
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());

  RegressionTree tree;
  auto& nodes = tree.nodes();
  nodes.emplace_back();

  // Root statistics.
  double root_cnt = 0.0, root_sum = 0.0, root_sq = 0.0;
  for (int r = 0; r < n; ++r) {
    const double w = weight[static_cast<std::size_t>(r)];
    if (w <= 0.0) continue;
    root_cnt += w;
    root_sum += w * y[r];
    root_sq += w * y[r] * y[r];
  }
  nodes[0].value = root_cnt > 0.0 ? root_sum / root_cnt : 0.0;
  if (root_cnt <= 0.0) return tree;

  std::vector<int> row_slot(static_cast<std::size_t>(n), -1);
  for (int r = 0; r < n; ++r)
    if (weight[static_cast<std::size_t>(r)] > 0) row_slot[static_cast<std::size_t>(r)] = 0;

  std::vector<LevelSlot> level(1);
  level[0] = {0, root_cnt, root_sum, root_sq, 0.0, -1, 0.0};

  std::vector<std::uint64_t> mask_storage;
  std::vector<FeatureMask> masks;
  masks.emplace_back(p, opt.mtry);
  masks[0].sample(mask_storage, p, opt.mtry, rng);

  // Scratch arrays reused across levels/features.
  std::vector<double> run_cnt, run_sum, last_val;
  std::vector<char> seen;

  int depth = 0;
  while (!level.empty()) {
    if (opt.max_depth >= 0 && depth >= opt.max_depth) break;
    const std::size_t m = level.size();

    run_cnt.assign(m, 0.0);
    run_sum.assign(m, 0.0);
    last_val.assign(m, 0.0);
    seen.assign(m, 0);

    for (int f = 0; f < p; ++f) {
      std::fill(run_cnt.begin(), run_cnt.end(), 0.0);
      std::fill(run_sum.begin(), run_sum.end(), 0.0);
      std::fill(seen.begin(), seen.end(), 0);
      const auto& ord = presort.order(f);
      for (int r : ord) {
        const int s = row_slot[static_cast<std::size_t>(r)];
        if (s < 0) continue;
        LevelSlot& slot = level[static_cast<std::size_t>(s)];
        if (!masks[static_cast<std::size_t>(slot.node_id)].test(mask_storage, f)) continue;
        const double v = X(r, f);
        const double w = weight[static_cast<std::size_t>(r)];
        if (seen[static_cast<std::size_t>(s)] && v > last_val[static_cast<std::size_t>(s)]) {
          const double cl = run_cnt[static_cast<std::size_t>(s)];
          const double cr = slot.cnt - cl;
          if (cl >= opt.min_leaf && cr >= opt.min_leaf) {
            const double sl = run_sum[static_cast<std::size_t>(s)];
            const double sr = slot.sum - sl;
            const double gain = sl * sl / cl + sr * sr / cr - slot.sum * slot.sum / slot.cnt;
            if (gain > slot.gain + 1e-12) {
              slot.gain = gain;
              slot.feature = f;
              slot.threshold = 0.5 * (last_val[static_cast<std::size_t>(s)] + v);
            }
          }
        }
        run_cnt[static_cast<std::size_t>(s)] += w;
        run_sum[static_cast<std::size_t>(s)] += w * y[r];
        last_val[static_cast<std::size_t>(s)] = v;
        seen[static_cast<std::size_t>(s)] = 1;
      }
    }

    // Materialize splits in slot order; build the next level.
    std::vector<LevelSlot> next;
    std::vector<int> left_slot(m, -1), right_slot(m, -1);
    for (std::size_t s = 0; s < m; ++s) {
      LevelSlot& slot = level[s];
      if (slot.feature < 0 || slot.gain <= 1e-12) continue;
      TreeNode& nd = nodes[static_cast<std::size_t>(slot.node_id)];
      nd.feature = slot.feature;
      nd.threshold = slot.threshold;
      nd.left = static_cast<int>(nodes.size());
      nd.right = nd.left + 1;
      nodes.emplace_back();
      nodes.emplace_back();
      masks.emplace_back(p, opt.mtry);
      masks.back().sample(mask_storage, p, opt.mtry, rng);
      masks.emplace_back(p, opt.mtry);
      masks.back().sample(mask_storage, p, opt.mtry, rng);

      left_slot[s] = static_cast<int>(next.size());
      next.push_back({nd.left, 0.0, 0.0, 0.0, 0.0, -1, 0.0});
      right_slot[s] = static_cast<int>(next.size());
      next.push_back({nd.right, 0.0, 0.0, 0.0, 0.0, -1, 0.0});
    }

    // Re-route rows and accumulate child statistics.
    for (int r = 0; r < n; ++r) {
      const int s = row_slot[static_cast<std::size_t>(r)];
      if (s < 0) continue;
      const LevelSlot& slot = level[static_cast<std::size_t>(s)];
      if (left_slot[static_cast<std::size_t>(s)] < 0) {
        row_slot[static_cast<std::size_t>(r)] = -1;  // finalized leaf
        continue;
      }
      const TreeNode& nd = nodes[static_cast<std::size_t>(slot.node_id)];
      const int child = X(r, nd.feature) <= nd.threshold
                            ? left_slot[static_cast<std::size_t>(s)]
                            : right_slot[static_cast<std::size_t>(s)];
      row_slot[static_cast<std::size_t>(r)] = child;
      LevelSlot& cs = next[static_cast<std::size_t>(child)];
      const double w = weight[static_cast<std::size_t>(r)];
      cs.cnt += w;
      cs.sum += w * y[r];
      cs.sq += w * y[r] * y[r];
    }

    // Child leaf values; drop children that cannot split from the frontier.
    std::vector<LevelSlot> frontier;
    frontier.reserve(next.size());
    for (LevelSlot& cs : next) {
      nodes[static_cast<std::size_t>(cs.node_id)].value = cs.cnt > 0.0 ? cs.sum / cs.cnt : 0.0;
      const double sse = cs.sq - (cs.cnt > 0.0 ? cs.sum * cs.sum / cs.cnt : 0.0);
      if (cs.cnt >= 2.0 * opt.min_leaf && sse > 1e-12) frontier.push_back(cs);
    }
    // Rows pointing at non-frontier children must be finalized.
    if (frontier.size() != next.size()) {
      std::vector<int> remap(next.size(), -1);
      for (std::size_t i = 0; i < frontier.size(); ++i) {
        for (std::size_t jj = 0; jj < next.size(); ++jj)
          if (next[jj].node_id == frontier[i].node_id) remap[jj] = static_cast<int>(i);
      }
      for (int r = 0; r < n; ++r) {
        int& s = row_slot[static_cast<std::size_t>(r)];
        if (s >= 0) s = remap[static_cast<std::size_t>(s)];
      }
    }
    level = std::move(frontier);
    ++depth;
  }

  return tree;
}

}  // namespace dml
