#pragma once

#include <functional>

#include "topkfs/rng.hpp"
#include "topkfs/topk.hpp"
#include "topkfs/types.hpp"

namespace topkfs {

enum class Activation { relu, linear, sigmoid, softmax };
enum class Optimizer { sgd, adam };

// Feed-forward net with a one-to-one input layer: the input is scaled
// coordinatewise by w before the dense stack. Each dense layer matrix has
// shape (fan_in + 1) x width with the bias folded in as the last row.
struct MlpParams {
  WeightVector w;
  std::vector<Matrix> layers;
  std::vector<Activation> activations;

  long input_dim() const { return w.size(); }
  long output_dim() const { return layers.empty() ? 0 : layers.back().cols(); }
};

struct TrainConfig {
  Hyperparams hyper;
  Task task = Task::regression;
  int n_classes = 0;  // 0 = infer from labels
  long epochs = 200;
  long batch_size = 0;  // 0 = full batch below 1024 samples, otherwise 128
  Optimizer optimizer = Optimizer::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::vector<int> hidden_widths = {64, 32};
  // Squared-Frobenius decay on the hidden/output matrices. The objective
  // penalizes the one-to-one weights only, so this stays 0 by default.
  double hidden_decay = 0.0;
  std::uint64_t seed = 0;
};

// Gradients shaped like MlpParams.
struct MlpGrads {
  Vector dw;
  std::vector<Matrix> dlayers;
};

// One-to-one weights start at 1 so every feature initially passes; hidden
// weights are He-scaled Gaussians, bias rows zero. Output activation follows
// the task: linear / sigmoid / softmax. Hidden activations are relu.
MlpParams init_params(long input_dim, const TrainConfig& cfg, Rng& rng);

// masked = false evaluates the lead network (input scaled by w);
// masked = true evaluates the sub-network (input scaled by the top-k mask
// of w) with the same hidden-layer weights.
Matrix forward(const MlpParams& params, const Matrix& X, bool masked, int k);

// lead data loss + lambda_topk * masked data loss
//   + lambda_l1 ||w||_1 + lambda_l2 l2term(w).
// Data losses are per-sample means (squared error / cross-entropy from
// logits); penalties apply to the one-to-one weights only.
double loss(const MlpParams& params, const Matrix& X, const Vector& y,
            const TrainConfig& cfg);

// Lead and masked branch data-loss gradients, unscaled and uncombined.
// masked.dw is the raw gradient with respect to the masked input weights;
// combining routes it through the active set.
struct BranchGrads {
  MlpGrads lead;
  MlpGrads masked;  // zero-sized when lambda_topk = 0
  ActiveSet set;
};
BranchGrads branch_gradients(const MlpParams& params, const Matrix& X, const Vector& y,
                             const TrainConfig& cfg);

// Total gradient: lead + lambda_topk * masked on shared hidden weights; the
// one-to-one gradient takes the masked branch only on the active set
// (route_gradient), plus the penalty subgradients (l1 subgradient 0 at 0).
MlpGrads backward(const MlpParams& params, const Matrix& X, const Vector& y,
                  const TrainConfig& cfg);

struct TrainResult {
  MlpParams params;
  std::vector<double> epoch_loss;  // mean sample loss per epoch
};

// Mini-batch training, deterministic given cfg.seed (fixed init, fixed
// shuffles). The active set is frozen within a batch step and recomputed
// between steps.
TrainResult train(const Matrix& X, const Vector& y, const TrainConfig& cfg);

// Resumes from the given parameters instead of initializing; optimizer
// state starts fresh.
TrainResult train(const Matrix& X, const Vector& y, const TrainConfig& cfg,
                  const MlpParams& initial);

// Identical engine with the masked branch compiled out (lambda_topk forced
// to 0); train() with lambda_topk = 0 is bit-identical to this.
TrainResult train_plain(const Matrix& X, const Vector& y, const TrainConfig& cfg);

// A bounded Lipschitz function of a declared coordinate subset, the target
// class for the approximation study.
struct SparseTarget {
  long input_dim = 0;
  std::vector<int> coords;
  std::function<double(const std::vector<double>&)> fn;  // values at coords
  double eta = 1.0;
  double radius = 1.0;

  double evaluate(const Vector& x) const;
};

struct ApproxRow {
  int width;
  std::uint64_t seed;
  double sup_error;
};

struct ApproxStudyConfig {
  long n_train = 2000;
  long epochs = 400;         // support-discovery phase, l1 pressure on
  long refine_epochs = 400;  // refinement phase, l1 off
  double lambda_topk = 1.0;
  double lambda_l1 = 1e-2;
  double learning_rate = 3e-3;
  long batch_size = 128;
  // Training samples cover a cube this factor wider than the evaluation
  // grid, so the reported sup measures interpolation rather than boundary
  // extrapolation.
  double domain_margin = 1.25;
  std::uint64_t base_seed = 1;
};

// For each hidden width, trains a 2-layer net on samples of the target and
// reports sup |target - masked forward| over a dense grid on the declared
// coordinates (other coordinates zero). Training runs in two phases: the
// full objective with the l1 penalty until the one-to-one ranking settles,
// then continued training with the penalty off. Training data per seed is
// shared across widths. Reports empirical trends only; no bound constants
// are checked.
std::vector<ApproxRow> approx_study(const SparseTarget& target,
                                    const std::vector<int>& widths, int n_seeds,
                                    int grid_size, const ApproxStudyConfig& cfg = {});

}  // namespace topkfs
