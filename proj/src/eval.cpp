#include "topkfs/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "topkfs/rng.hpp"

namespace topkfs {

SelectionScore f1_selection(const ActiveSet& selected, const std::vector<int>& informative) {
  SelectionScore score;
  if (selected.indices.empty() || informative.empty()) return score;
  std::set<int> truth(informative.begin(), informative.end());
  long hits = 0;
  for (int i : selected.indices) hits += truth.count(i) ? 1 : 0;
  score.precision = static_cast<double>(hits) / static_cast<double>(selected.indices.size());
  score.recall = static_cast<double>(hits) / static_cast<double>(truth.size());
  if (score.precision + score.recall > 0)
    score.f1 = 2.0 * score.precision * score.recall / (score.precision + score.recall);
  return score;
}

namespace {
void check_same_size(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() == 0)
    throw std::invalid_argument("metric: size mismatch or empty input");
}
}  // namespace

double mae(const Vector& y, const Vector& pred) {
  check_same_size(y, pred);
  return (y - pred).cwiseAbs().mean();
}

double r2(const Vector& y, const Vector& pred) {
  check_same_size(y, pred);
  double ss_res = (y - pred).squaredNorm();
  double ss_tot = (y.array() - y.mean()).square().sum();
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

double explained_variance(const Vector& y, const Vector& pred) {
  check_same_size(y, pred);
  Vector residual = y - pred;
  double res_var = (residual.array() - residual.mean()).square().sum();
  double y_var = (y.array() - y.mean()).square().sum();
  if (y_var == 0.0) return res_var == 0.0 ? 1.0 : 0.0;
  return 1.0 - res_var / y_var;
}

double max_error(const Vector& y, const Vector& pred) {
  check_same_size(y, pred);
  return (y - pred).cwiseAbs().maxCoeff();
}

double accuracy(const Vector& labels, const Vector& predicted) {
  check_same_size(labels, predicted);
  long hits = 0;
  for (long i = 0; i < labels.size(); ++i) hits += labels[i] == predicted[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

Vector OlsModel::predict(const Matrix& X) const {
  if (X.cols() != coef.size()) throw std::invalid_argument("ols predict: shape mismatch");
  return (X * coef).array() + intercept;
}

OlsModel ols_fit(const Matrix& X, const Vector& y) {
  if (y.size() != X.rows() || X.rows() < 1)
    throw std::invalid_argument("ols_fit: shape mismatch or empty data");
  const long n = X.rows(), m = X.cols();
  Matrix design(n, m + 1);
  design.leftCols(m) = X;
  design.col(m).setOnes();

  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  Vector solution;
  if (qr.rank() < m + 1) {
    warn("ols_fit: rank-deficient design, adding 1e-10 ridge jitter");
    Matrix gram = design.transpose() * design;
    gram.diagonal().array() += 1e-10;
    solution = gram.ldlt().solve(design.transpose() * y);
  } else {
    solution = qr.solve(y);
  }

  OlsModel model;
  model.coef = solution.head(m);
  model.intercept = solution[m];
  return model;
}

MetricSet regression_metrics(const Vector& y, const Vector& pred) {
  return {{"mae", mae(y, pred)},
          {"r2", r2(y, pred)},
          {"explained_variance", explained_variance(y, pred)},
          {"max_error", max_error(y, pred)}};
}

ExtraTrees::ExtraTrees(int n_trees, std::uint64_t seed, int min_samples_split)
    : n_trees_(n_trees), seed_(seed), min_samples_split_(min_samples_split) {
  if (n_trees < 1) throw std::invalid_argument("ExtraTrees: need >= 1 tree");
  if (min_samples_split < 2) throw std::invalid_argument("ExtraTrees: min_samples_split >= 2");
}

namespace {

int majority_label(const std::vector<int>& labels, const std::vector<long>& rows,
                   int n_classes) {
  std::vector<long> counts(n_classes, 0);
  for (long r : rows) counts[labels[r]]++;
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

double gini(const std::vector<long>& counts, long total) {
  if (total == 0) return 0.0;
  double sum_sq = 0.0;
  for (long c : counts) {
    double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

}  // namespace

void ExtraTrees::fit(const Matrix& X, const Vector& labels) {
  if (labels.size() != X.rows() || X.rows() < 1)
    throw std::invalid_argument("ExtraTrees::fit: shape mismatch or empty data");
  std::vector<int> y(X.rows());
  int max_label = 0;
  for (long i = 0; i < labels.size(); ++i) {
    if (labels[i] != std::floor(labels[i]) || labels[i] < 0)
      throw std::invalid_argument("ExtraTrees::fit: labels must be nonnegative integers");
    y[i] = static_cast<int>(labels[i]);
    max_label = std::max(max_label, y[i]);
  }
  n_classes_ = max_label + 1;
  if (n_classes_ < 2) {
    warn("ExtraTrees::fit: single-class training set, classifier is constant");
    n_classes_ = std::max(n_classes_, 1);
  }

  const long m = X.cols();
  const int n_candidates =
      std::max(1, static_cast<int>(std::round(std::sqrt(static_cast<double>(m)))));

  trees_.assign(n_trees_, Tree{});
  Rng root(seed_);
  for (int t = 0; t < n_trees_; ++t) {
    Rng rng = root.fork(static_cast<std::uint64_t>(t));
    Tree& tree = trees_[t];

    std::vector<long> all_rows(X.rows());
    std::iota(all_rows.begin(), all_rows.end(), 0);

    // Iterative build with an explicit stack of (node index, rows).
    struct Item {
      int node;
      std::vector<long> rows;
    };
    tree.nodes.push_back(Node{});
    std::vector<Item> stack;
    stack.push_back({0, std::move(all_rows)});

    while (!stack.empty()) {
      Item item = std::move(stack.back());
      stack.pop_back();
      const std::vector<long>& rows = item.rows;

      bool pure = true;
      for (size_t i = 1; i < rows.size(); ++i)
        if (y[rows[i]] != y[rows[0]]) {
          pure = false;
          break;
        }
      if (pure || static_cast<int>(rows.size()) < min_samples_split_) {
        tree.nodes[item.node].label = majority_label(y, rows, n_classes_);
        continue;
      }

      // Features that still vary on this node's rows.
      std::vector<int> varying;
      for (long j = 0; j < m; ++j) {
        double lo = X(rows[0], j), hi = lo;
        for (long r : rows) {
          lo = std::min(lo, X(r, j));
          hi = std::max(hi, X(r, j));
        }
        if (hi > lo) varying.push_back(static_cast<int>(j));
      }
      if (varying.empty()) {
        tree.nodes[item.node].label = majority_label(y, rows, n_classes_);
        continue;
      }

      int draw = std::min<int>(n_candidates, static_cast<int>(varying.size()));
      for (int i = 0; i < draw; ++i) {
        int j = i + static_cast<int>(rng.uniform_index(varying.size() - i));
        std::swap(varying[i], varying[j]);
      }

      int best_feature = -1;
      double best_threshold = 0.0, best_score = -1.0;
      std::vector<long> left_counts(n_classes_), right_counts(n_classes_);
      for (int c = 0; c < draw; ++c) {
        int j = varying[c];
        double lo = X(rows[0], j), hi = lo;
        for (long r : rows) {
          lo = std::min(lo, X(r, j));
          hi = std::max(hi, X(r, j));
        }
        double threshold = rng.uniform(lo, hi);
        std::fill(left_counts.begin(), left_counts.end(), 0);
        std::fill(right_counts.begin(), right_counts.end(), 0);
        long n_left = 0;
        for (long r : rows) {
          if (X(r, j) <= threshold) {
            left_counts[y[r]]++;
            n_left++;
          } else {
            right_counts[y[r]]++;
          }
        }
        long n_right = static_cast<long>(rows.size()) - n_left;
        if (n_left == 0 || n_right == 0) continue;
        double total = static_cast<double>(rows.size());
        double score = gini(left_counts, n_left) * (n_left / total) +
                       gini(right_counts, n_right) * (n_right / total);
        // Smallest weighted child impurity = largest Gini decrease.
        if (best_feature < 0 || score < best_score) {
          best_feature = j;
          best_threshold = threshold;
          best_score = score;
        }
      }
      if (best_feature < 0) {
        tree.nodes[item.node].label = majority_label(y, rows, n_classes_);
        continue;
      }

      std::vector<long> left_rows, right_rows;
      for (long r : rows) {
        if (X(r, best_feature) <= best_threshold)
          left_rows.push_back(r);
        else
          right_rows.push_back(r);
      }

      int left_id = static_cast<int>(tree.nodes.size());
      int right_id = left_id + 1;
      tree.nodes.push_back(Node{});
      tree.nodes.push_back(Node{});
      Node& parent = tree.nodes[item.node];
      parent.feature = best_feature;
      parent.threshold = best_threshold;
      parent.left = left_id;
      parent.right = right_id;
      stack.push_back({right_id, std::move(right_rows)});
      stack.push_back({left_id, std::move(left_rows)});
    }
  }
}

int ExtraTrees::classify(const Tree& tree, const Eigen::RowVectorXd& x) const {
  int node = 0;
  while (tree.nodes[node].label < 0) {
    const Node& n = tree.nodes[node];
    node = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return tree.nodes[node].label;
}

Vector ExtraTrees::predict(const Matrix& X) const {
  if (trees_.empty()) throw std::logic_error("ExtraTrees::predict before fit");
  Vector out(X.rows());
  std::vector<long> votes(std::max(n_classes_, 1));
  for (long i = 0; i < X.rows(); ++i) {
    std::fill(votes.begin(), votes.end(), 0);
    for (const Tree& tree : trees_) votes[classify(tree, X.row(i))]++;
    out[i] = static_cast<double>(
        std::max_element(votes.begin(), votes.end()) - votes.begin());
  }
  return out;
}

ExtraTrees extra_trees_fit(const Matrix& X, const Vector& labels, int n_trees,
                           std::uint64_t seed) {
  ExtraTrees model(n_trees, seed);
  model.fit(X, labels);
  return model;
}

}  // namespace topkfs
