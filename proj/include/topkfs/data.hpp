#pragma once

#include <optional>

#include "topkfs/rng.hpp"
#include "topkfs/types.hpp"

namespace topkfs {

// Dense supervised dataset. For classification tasks y holds class indices
// stored as exact integral doubles in [0, n_classes).
struct Dataset {
  Matrix X;
  Vector y;
  Task task = Task::regression;
  std::vector<std::string> feature_names;
  std::optional<std::vector<int>> informative;  // ground-truth informative columns
  int n_classes = 0;                            // 0 for regression

  long n() const { return X.rows(); }
  long m() const { return X.cols(); }
  void validate() const;
};

// Column means/sds fit on a training split; applied to train and test alike.
struct StandardizeTransform {
  Vector feature_mean;
  Vector feature_sd;  // floored at 1e-12
  double target_mean = 0.0;
  bool targets_centered = false;

  void apply(Dataset& d) const;
};

// X ~ iid standard Gaussian; true coefficients uniform in [1,10] with random
// signs on a random n_informative-subset; y = X w* + Gaussian(0, noise_sd).
Dataset make_sparse_regression(long n, long m, int n_informative, double noise_sd,
                               std::uint64_t seed);

// Planted classification analogue: class scores are linear in a random
// informative subset (coefficients as above, one coefficient vector per
// class), y = argmax of scores + Gaussian(0, noise_sd) score noise.
// n_classes = 2 gives a binary task.
Dataset make_sparse_classification(long n, long m, int n_informative, int n_classes,
                                   double noise_sd, std::uint64_t seed);

// Noise-injection: one 20-sample subset is drawn (all samples when n < 20);
// per original feature j its subset mean mu_j and sd sigma_j give a Gaussian
// N(mean_scale*mu_j, sd_scale*sigma_j) from which n values are drawn and
// appended as feature m+j. Output has exactly 2m features, the original
// columns untouched, and the original indices recorded as informative.
// The default scales are 0.1 and 0.01; overriding them supports
// sensitivity studies with less degenerate noise.
Dataset inject_noise_features(const Dataset& d, std::uint64_t seed,
                              double mean_scale = 0.1, double sd_scale = 0.01);

// CSV: UTF-8, comma-separated, header row, decimal-point numerics, no
// missing values. Target column by name or by index string ("3").
// Classification labels must be integral; they are remapped to dense class
// indices by sorted value order.
Dataset load_csv(const std::string& path, const std::string& target_column, Task task);

// Writes X and y with round-trip precision (shortest representation that
// parses back to the same double).
void save_csv(const Dataset& d, const std::string& path,
              const std::string& target_name = "target");

// Seeded permutation partition; both parts non-empty.
std::pair<Dataset, Dataset> split(const Dataset& d, double train_ratio,
                                  std::uint64_t seed);

// Fits on train, applies to both. Regression targets are centered when
// center_targets is set.
StandardizeTransform standardize(Dataset& train, Dataset& test,
                                 bool center_targets = true);
StandardizeTransform standardize(Dataset& train, bool center_targets = true);

// Columns of d restricted to the given ascending index list.
Dataset select_columns(const Dataset& d, const std::vector<int>& columns);

}  // namespace topkfs
