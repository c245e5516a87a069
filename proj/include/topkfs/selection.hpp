#pragma once

#include "topkfs/data.hpp"
#include "topkfs/eval.hpp"
#include "topkfs/linear.hpp"
#include "topkfs/mlp.hpp"

namespace topkfs {

enum class ModelKind { lasso, ridge, enet, mlp_reg, mlp_clf };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);
bool is_linear(ModelKind kind);

// Everything a selection run depends on. train.hyper carries the
// regularization strengths and k for linear and MLP models alike;
// train.seed is the run seed.
struct SelectConfig {
  ModelKind kind = ModelKind::enet;
  bool use_topk = true;
  TrainConfig train;
  bool standardize = true;   // standardize splits inside stability / sweep_k
  double split_ratio = 0.8;  // split used by sweep_k
};

// FNV-1a 64-bit over the canonical settings string; stable across runs and
// platforms. The seed is not part of the fingerprint.
std::uint64_t fnv1a64(const std::string& text);
std::string config_fingerprint(const SelectConfig& cfg);

struct SelectionReport {
  ActiveSet selected;
  WeightVector weights;
  ModelKind kind = ModelKind::enet;
  bool use_topk = true;
  int k = 0;
  std::uint64_t seed = 0;
  std::string fingerprint;
  bool degenerate_all_zero = false;
  bool converged = true;
  long iterations = 0;
  double train_seconds = 0.0;  // informational; kept out of result files
};

// Trains the configured model on the given (already prepared) dataset and
// returns the top-k indices of the final |w| under the fixed tie rule.
// Model kinds force the matching penalties: lasso drops the l2 term, ridge
// the l1 term; use_topk = false runs the plain code path.
SelectionReport select(const Dataset& d, const SelectConfig& cfg);

// |a ∩ b| / |a ∪ b|; 0 when both are empty.
double jaccard_similarity(const std::vector<int>& a, const std::vector<int>& b);

struct StabilityResult {
  std::vector<SelectionReport> reports;
  Matrix jaccard;  // pairwise |S_i ∩ S_j| / |S_i ∪ S_j|
  double mean_jaccard = 0.0;
};

// Runs select on n_splits random training splits with derived seeds
// (seed_i = base + i drives both the split and the training).
StabilityResult stability(const Dataset& d, const SelectConfig& cfg, int n_splits = 10,
                          double ratio = 0.8);

struct SweepRow {
  int k = 0;
  SelectionReport report;
  MetricSet metrics;  // downstream scores, plus selection f1 when known
};

// One shared seeded split; per k: select on the training part, then a fresh
// downstream model (OLS for regression, extra-trees for classification) fit
// on the selected columns and scored on the test part.
std::vector<SweepRow> sweep_k(const Dataset& d, const SelectConfig& cfg,
                              const std::vector<int>& k_values);

}  // namespace topkfs
