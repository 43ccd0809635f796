#include "dml/learners/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "dml/learners/tree.hpp"
#include "dml/rng.hpp"

namespace dml {

namespace detail {

std::vector<int> default_mtry_candidates(int p) {
  std::set<int> cands;
  cands.insert(std::max(1, p / 3));
  cands.insert(std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(p))))));
  cands.insert(std::max(1, p / 2));
  cands.insert(std::max(1, p));
  return {cands.begin(), cands.end()};
}

}  // namespace detail

namespace {

class ForestModel : public FittedModel {
 public:
  ForestModel(Eigen::Index features, std::vector<RegressionTree> trees)
      : FittedModel(features), trees_(std::move(trees)) {}

 private:
  Eigen::VectorXd predict_impl(const Eigen::MatrixXd& X) const override {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(X.rows());
    for (const RegressionTree& t : trees_) out += t.predict(X);
    return out / static_cast<double>(trees_.size());
  }
  std::vector<RegressionTree> trees_;
};

}  // namespace

FitResult fit_random_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const LearnerSpec& spec) {
  const auto& prm = std::get<ForestParams>(spec.params);
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (n < 2) throw ConfigError("forest: need at least 2 rows");

  std::vector<int> cands = prm.mtry_candidates.empty() ? detail::default_mtry_candidates(p)
                                                       : prm.mtry_candidates;
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
  for (int& c : cands) c = std::min(c, p);

  const FeaturePresort presort(X);
  const Rng base(spec.tuning_seed);

  FitResult out;
  out.tuning.parameter = "mtry";

  double best_oob = std::numeric_limits<double>::infinity();
  std::vector<RegressionTree> best_trees;

  for (std::size_t ci = 0; ci < cands.size(); ++ci) {
    TreeOptions opt;
    opt.max_depth = -1;
    opt.min_leaf = prm.min_leaf;
    opt.mtry = cands[ci];

    std::vector<RegressionTree> trees;
    trees.reserve(static_cast<std::size_t>(prm.n_trees));
    Eigen::VectorXd oob_sum = Eigen::VectorXd::Zero(n);
    Eigen::VectorXi oob_cnt = Eigen::VectorXi::Zero(n);

    std::vector<int> weight(static_cast<std::size_t>(n));
    for (int t = 0; t < prm.n_trees; ++t) {
      Rng rng = base.fork(mix_seed(static_cast<std::uint64_t>(ci) + 1,
                                   static_cast<std::uint64_t>(t)));
      std::fill(weight.begin(), weight.end(), 0);
      for (int i = 0; i < n; ++i)
        ++weight[static_cast<std::size_t>(rng.uniform_int(static_cast<std::uint64_t>(n)))];

      trees.push_back(grow_tree(presort, y, weight, opt, rng));
      const RegressionTree& tree = trees.back();
      for (int r = 0; r < n; ++r) {
        if (weight[static_cast<std::size_t>(r)] == 0) {
          oob_sum[r] += tree.predict_row(X, r);
          ++oob_cnt[r];
        }
      }
    }

    double err = 0.0;
    int covered = 0;
    for (int r = 0; r < n; ++r) {
      if (oob_cnt[r] > 0) {
        const double e = oob_sum[r] / oob_cnt[r] - y[r];
        err += e * e;
        ++covered;
      }
    }
    err = covered > 0 ? err / covered : std::numeric_limits<double>::infinity();

    out.tuning.candidates.push_back(static_cast<double>(cands[ci]));
    out.tuning.errors.push_back(err);
    if (err < best_oob) {
      best_oob = err;
      best_trees = std::move(trees);
    }
  }

  out.tuning.choose_min();
  out.model = std::make_shared<ForestModel>(p, std::move(best_trees));
  return out;
}

}  // namespace dml
