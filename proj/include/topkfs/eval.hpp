#pragma once

#include <map>
#include <memory>

#include "topkfs/topk.hpp"
#include "topkfs/types.hpp"

namespace topkfs {

using MetricSet = std::map<std::string, double>;

struct SelectionScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// precision = |S∩I|/|S|, recall = |S∩I|/|I|, f1 their harmonic mean; all
// three are 0 when the informative set is empty or the overlap is empty.
SelectionScore f1_selection(const ActiveSet& selected, const std::vector<int>& informative);

double mae(const Vector& y, const Vector& pred);
double r2(const Vector& y, const Vector& pred);
double explained_variance(const Vector& y, const Vector& pred);
double max_error(const Vector& y, const Vector& pred);
double accuracy(const Vector& labels, const Vector& predicted);

// Least squares with intercept. Rank deficiency falls back to a tiny ridge
// jitter (1e-10) with a warning.
struct OlsModel {
  Vector coef;
  double intercept = 0.0;
  Vector predict(const Matrix& X) const;
};
OlsModel ols_fit(const Matrix& X, const Vector& y);

MetricSet regression_metrics(const Vector& y, const Vector& pred);

// Extremely randomized trees: full training set per tree, fully grown, one
// uniform random cut per candidate feature (sqrt(m) candidates per node),
// best split by Gini impurity decrease, majority vote with ties to the
// lowest class index. Deterministic given the seed.
class ExtraTrees {
 public:
  ExtraTrees(int n_trees, std::uint64_t seed, int min_samples_split = 2);

  void fit(const Matrix& X, const Vector& labels);
  Vector predict(const Matrix& X) const;
  int n_classes() const { return n_classes_; }

 private:
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1, right = -1;
    int label = -1;  // leaf when >= 0
  };
  struct Tree {
    std::vector<Node> nodes;
  };

  int classify(const Tree& tree, const Eigen::RowVectorXd& x) const;

  int n_trees_;
  std::uint64_t seed_;
  int min_samples_split_;
  int n_classes_ = 0;
  std::vector<Tree> trees_;
};

ExtraTrees extra_trees_fit(const Matrix& X, const Vector& labels, int n_trees,
                           std::uint64_t seed);

}  // namespace topkfs
