#include "topkfs/mlp.hpp"

#include <cmath>

namespace topkfs {

namespace {

double l2_term(const WeightVector& w, const Hyperparams& h) {
  return h.l2_squared ? w.squaredNorm() : w.norm();
}

Vector l2_gradient(const WeightVector& w, const Hyperparams& h) {
  if (h.l2_squared) return 2.0 * w;
  double norm = w.norm();
  if (norm == 0.0) return Vector::Zero(w.size());
  return w / norm;
}

Matrix with_ones(const Matrix& a) {
  Matrix out(a.rows(), a.cols() + 1);
  out.leftCols(a.cols()) = a;
  out.col(a.cols()).setOnes();
  return out;
}

Matrix apply_activation(const Matrix& z, Activation act) {
  switch (act) {
    case Activation::linear:
      return z;
    case Activation::relu:
      return z.cwiseMax(0.0);
    case Activation::sigmoid: {
      Matrix out(z.rows(), z.cols());
      for (long i = 0; i < z.size(); ++i) {
        double v = z(i);
        out(i) = v >= 0 ? 1.0 / (1.0 + std::exp(-v))
                        : std::exp(v) / (1.0 + std::exp(v));
      }
      return out;
    }
    case Activation::softmax: {
      Matrix out(z.rows(), z.cols());
      for (long r = 0; r < z.rows(); ++r) {
        double zmax = z.row(r).maxCoeff();
        Eigen::RowVectorXd e = (z.row(r).array() - zmax).exp();
        out.row(r) = e / e.sum();
      }
      return out;
    }
  }
  return z;
}

struct ForwardCache {
  Matrix input_scaled;          // X * Diag(w_eff)
  std::vector<Matrix> pre;      // pre-activations per layer
  std::vector<Matrix> post;     // post-activations per layer
};

ForwardCache run_forward(const MlpParams& params, const Matrix& X, const WeightVector& w_eff) {
  if (X.cols() != params.w.size()) throw std::invalid_argument("forward: feature count mismatch");
  ForwardCache cache;
  cache.input_scaled = X.array().rowwise() * w_eff.transpose().array();
  const size_t n_layers = params.layers.size();
  cache.pre.resize(n_layers);
  cache.post.resize(n_layers);
  const Matrix* prev = &cache.input_scaled;
  for (size_t i = 0; i < n_layers; ++i) {
    if (prev->cols() + 1 != params.layers[i].rows())
      throw std::invalid_argument("forward: layer shape mismatch at layer " + std::to_string(i));
    cache.pre[i] = with_ones(*prev) * params.layers[i];
    cache.post[i] = apply_activation(cache.pre[i], params.activations[i]);
    prev = &cache.post[i];
  }
  return cache;
}

double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double logsumexp_row(const Eigen::RowVectorXd& z) {
  double zmax = z.maxCoeff();
  return zmax + std::log((z.array() - zmax).exp().sum());
}

int output_width(Task task, int n_classes) {
  switch (task) {
    case Task::regression:
    case Task::binary:
      return 1;
    case Task::multiclass:
      return n_classes;
  }
  return 1;
}

int infer_classes(const Vector& y, const TrainConfig& cfg) {
  if (cfg.task == Task::regression) return 0;
  int max_label = 0;
  for (long i = 0; i < y.size(); ++i) {
    if (y[i] != std::floor(y[i]) || y[i] < 0)
      throw std::invalid_argument("labels must be nonnegative integers");
    max_label = std::max(max_label, static_cast<int>(y[i]));
  }
  int n_classes = cfg.n_classes > 0 ? cfg.n_classes : max_label + 1;
  if (max_label >= n_classes) throw std::invalid_argument("label out of range");
  if (cfg.task == Task::binary && n_classes != 2)
    throw std::invalid_argument("binary task requires 2 classes");
  return std::max(n_classes, 2);
}

// Mean data loss from the final pre-activation (logits).
double data_loss(const Matrix& logits, const Vector& y, Task task) {
  const long n = logits.rows();
  double total = 0.0;
  switch (task) {
    case Task::regression:
      total = (logits.col(0) - y).squaredNorm();
      break;
    case Task::binary:
      for (long i = 0; i < n; ++i) {
        double z = logits(i, 0);
        total += softplus(z) - y[i] * z;
      }
      break;
    case Task::multiclass:
      for (long i = 0; i < n; ++i) {
        int label = static_cast<int>(y[i]);
        if (label < 0 || label >= logits.cols())
          throw std::invalid_argument("label out of range");
        total += logsumexp_row(logits.row(i)) - logits(i, label);
      }
      break;
  }
  return total / static_cast<double>(n);
}

// d(mean data loss)/d(logits).
Matrix output_delta(const ForwardCache& cache, const Vector& y, Task task) {
  const Matrix& logits = cache.pre.back();
  const Matrix& out = cache.post.back();
  const long n = logits.rows();
  Matrix delta(logits.rows(), logits.cols());
  switch (task) {
    case Task::regression:
      delta = 2.0 * (out.col(0) - y) / static_cast<double>(n);
      break;
    case Task::binary:
      delta = (out.col(0) - y) / static_cast<double>(n);
      break;
    case Task::multiclass:
      delta = out / static_cast<double>(n);
      for (long i = 0; i < n; ++i) {
        int label = static_cast<int>(y[i]);
        delta(i, label) -= 1.0 / static_cast<double>(n);
      }
      break;
  }
  return delta;
}

// Backprop through one branch; dw is the raw gradient with respect to the
// branch's effective input weights.
MlpGrads branch_backward(const MlpParams& params, const Matrix& X, const Vector& y,
                         Task task, const ForwardCache& cache) {
  const size_t n_layers = params.layers.size();
  MlpGrads grads;
  grads.dlayers.resize(n_layers);

  Matrix delta = output_delta(cache, y, task);
  for (size_t i = n_layers; i-- > 0;) {
    const Matrix& below = i == 0 ? cache.input_scaled : cache.post[i - 1];
    grads.dlayers[i] = with_ones(below).transpose() * delta;
    Matrix up = delta * params.layers[i].transpose();
    Matrix up_trim = up.leftCols(up.cols() - 1);
    if (i == 0) {
      delta = std::move(up_trim);
    } else {
      // hidden layers are relu
      delta = (cache.pre[i - 1].array() > 0.0).cast<double>() * up_trim.array();
    }
  }
  grads.dw = (X.array() * delta.array()).colwise().sum();
  return grads;
}

long effective_batch(long n, long configured) {
  if (configured > 0) return std::min(configured, n);
  return n < 1024 ? n : 128;
}

struct AdamState {
  Vector mw, vw;
  std::vector<Matrix> mlayers, vlayers;
  long t = 0;
};

void adam_update(Vector& x, Vector& m, Vector& v, const Vector& g, const TrainConfig& cfg,
                 double bias1, double bias2) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v.array().matrix() + (1.0 - cfg.beta2) * g.cwiseProduct(g);
  Vector mhat = m / bias1;
  Vector vhat = v / bias2;
  x.array() -= cfg.learning_rate * mhat.array() / (vhat.array().sqrt() + cfg.adam_eps);
}

void adam_update(Matrix& x, Matrix& m, Matrix& v, const Matrix& g, const TrainConfig& cfg,
                 double bias1, double bias2) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
  Matrix mhat = m / bias1;
  Matrix vhat = v / bias2;
  x.array() -= cfg.learning_rate * mhat.array() / (vhat.array().sqrt() + cfg.adam_eps);
}

TrainResult run_training(const Matrix& X, const Vector& y, TrainConfig cfg,
                         const MlpParams* initial = nullptr) {
  if (X.rows() < 1 || X.cols() < 1) throw std::invalid_argument("train: empty data");
  if (y.size() != X.rows()) throw std::invalid_argument("train: |y| != rows of X");
  if (!all_finite(X) || !all_finite(y)) throw std::invalid_argument("train: non-finite data");
  cfg.hyper.validate();
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  for (int width : cfg.hidden_widths)
    if (width < 1) throw std::invalid_argument("train: hidden widths must be >= 1");

  cfg.n_classes = infer_classes(y, cfg);
  if (cfg.task != Task::regression) {
    std::vector<long> counts(cfg.n_classes, 0);
    for (long i = 0; i < y.size(); ++i) counts[static_cast<int>(y[i])]++;
    long present = 0;
    for (long c : counts) present += c > 0 ? 1 : 0;
    if (present < 2) throw std::invalid_argument("train: need >= 2 classes present");
  }

  const long n = X.rows();
  Rng rng(cfg.seed);
  MlpParams params = initial ? *initial : init_params(X.cols(), cfg, rng);
  if (initial && params.w.size() != X.cols())
    throw std::invalid_argument("train: initial parameters do not match the data");

  AdamState adam;
  if (cfg.optimizer == Optimizer::adam) {
    adam.mw = Vector::Zero(params.w.size());
    adam.vw = Vector::Zero(params.w.size());
    for (const Matrix& layer : params.layers) {
      adam.mlayers.push_back(Matrix::Zero(layer.rows(), layer.cols()));
      adam.vlayers.push_back(Matrix::Zero(layer.rows(), layer.cols()));
    }
  }

  const long batch = effective_batch(n, cfg.batch_size);
  std::vector<long> order(n);
  for (long i = 0; i < n; ++i) order[i] = i;

  TrainResult result;
  result.epoch_loss.reserve(cfg.epochs);
  Rng shuffle_rng = rng.fork(1);

  Matrix xb;
  Vector yb;
  for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order.data(), order.size());
    double epoch_total = 0.0;
    for (long start = 0; start < n; start += batch) {
      long size = std::min(batch, n - start);
      xb.resize(size, X.cols());
      yb.resize(size);
      for (long i = 0; i < size; ++i) {
        xb.row(i) = X.row(order[start + i]);
        yb[i] = y[order[start + i]];
      }

      double batch_loss = loss(params, xb, yb, cfg);
      if (!std::isfinite(batch_loss))
        throw NumericalError("train: loss is not finite", epoch);
      epoch_total += batch_loss * static_cast<double>(size);

      MlpGrads grads = backward(params, xb, yb, cfg);
      if (cfg.optimizer == Optimizer::adam) {
        adam.t++;
        double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam.t));
        double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam.t));
        adam_update(params.w, adam.mw, adam.vw, grads.dw, cfg, bias1, bias2);
        for (size_t i = 0; i < params.layers.size(); ++i)
          adam_update(params.layers[i], adam.mlayers[i], adam.vlayers[i], grads.dlayers[i],
                      cfg, bias1, bias2);
      } else {
        params.w -= cfg.learning_rate * grads.dw;
        for (size_t i = 0; i < params.layers.size(); ++i)
          params.layers[i] -= cfg.learning_rate * grads.dlayers[i];
      }
    }
    result.epoch_loss.push_back(epoch_total / static_cast<double>(n));
  }

  result.params = std::move(params);
  return result;
}

}  // namespace

MlpParams init_params(long input_dim, const TrainConfig& cfg, Rng& rng) {
  MlpParams params;
  params.w = WeightVector::Ones(input_dim);

  std::vector<long> widths;
  widths.push_back(input_dim);
  for (int width : cfg.hidden_widths) widths.push_back(width);
  widths.push_back(output_width(cfg.task, std::max(cfg.n_classes, 2)));

  for (size_t i = 0; i + 1 < widths.size(); ++i) {
    long fan_in = widths[i], fan_out = widths[i + 1];
    Matrix layer(fan_in + 1, fan_out);
    double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (long r = 0; r < fan_in; ++r)
      for (long c = 0; c < fan_out; ++c) layer(r, c) = scale * rng.normal();
    layer.row(fan_in).setZero();  // bias row
    params.layers.push_back(std::move(layer));
    bool last = i + 2 == widths.size();
    if (!last) {
      params.activations.push_back(Activation::relu);
    } else {
      switch (cfg.task) {
        case Task::regression: params.activations.push_back(Activation::linear); break;
        case Task::binary: params.activations.push_back(Activation::sigmoid); break;
        case Task::multiclass: params.activations.push_back(Activation::softmax); break;
      }
    }
  }
  return params;
}

Matrix forward(const MlpParams& params, const Matrix& X, bool masked, int k) {
  WeightVector w_eff = masked ? apply_mask(params.w, active_set(params.w, k)) : params.w;
  return run_forward(params, X, w_eff).post.back();
}

double loss(const MlpParams& params, const Matrix& X, const Vector& y,
            const TrainConfig& cfg) {
  const Hyperparams& h = cfg.hyper;
  ForwardCache lead = run_forward(params, X, params.w);
  double value = data_loss(lead.pre.back(), y, cfg.task);
  if (h.lambda_topk != 0.0) {
    WeightVector masked_w = apply_mask(params.w, active_set(params.w, h.k));
    ForwardCache sub = run_forward(params, X, masked_w);
    value += h.lambda_topk * data_loss(sub.pre.back(), y, cfg.task);
  }
  value += h.lambda_l1 * params.w.lpNorm<1>();
  value += h.lambda_l2 * l2_term(params.w, h);
  if (cfg.hidden_decay != 0.0)
    for (const Matrix& layer : params.layers) value += cfg.hidden_decay * layer.squaredNorm();
  return value;
}

BranchGrads branch_gradients(const MlpParams& params, const Matrix& X, const Vector& y,
                             const TrainConfig& cfg) {
  const Hyperparams& h = cfg.hyper;
  BranchGrads out;
  ForwardCache lead_cache = run_forward(params, X, params.w);
  out.lead = branch_backward(params, X, y, cfg.task, lead_cache);
  if (h.lambda_topk != 0.0) {
    out.set = active_set(params.w, h.k);
    WeightVector masked_w = apply_mask(params.w, out.set);
    ForwardCache sub_cache = run_forward(params, X, masked_w);
    out.masked = branch_backward(params, X, y, cfg.task, sub_cache);
  }
  return out;
}

MlpGrads backward(const MlpParams& params, const Matrix& X, const Vector& y,
                  const TrainConfig& cfg) {
  const Hyperparams& h = cfg.hyper;
  BranchGrads branches = branch_gradients(params, X, y, cfg);
  MlpGrads total = std::move(branches.lead);
  if (h.lambda_topk != 0.0) {
    total.dw += route_gradient(branches.masked.dw, branches.set, h.lambda_topk);
    for (size_t i = 0; i < total.dlayers.size(); ++i)
      total.dlayers[i] += h.lambda_topk * branches.masked.dlayers[i];
  }
  for (long j = 0; j < total.dw.size(); ++j) {
    double wj = params.w[j];
    if (wj > 0)
      total.dw[j] += h.lambda_l1;
    else if (wj < 0)
      total.dw[j] -= h.lambda_l1;
  }
  total.dw += h.lambda_l2 * l2_gradient(params.w, h);
  if (cfg.hidden_decay != 0.0)
    for (size_t i = 0; i < total.dlayers.size(); ++i)
      total.dlayers[i] += 2.0 * cfg.hidden_decay * params.layers[i];
  return total;
}

TrainResult train(const Matrix& X, const Vector& y, const TrainConfig& cfg) {
  return run_training(X, y, cfg);
}

TrainResult train(const Matrix& X, const Vector& y, const TrainConfig& cfg,
                  const MlpParams& initial) {
  return run_training(X, y, cfg, &initial);
}

TrainResult train_plain(const Matrix& X, const Vector& y, const TrainConfig& cfg) {
  TrainConfig plain = cfg;
  plain.hyper.lambda_topk = 0.0;
  return run_training(X, y, plain);
}

double SparseTarget::evaluate(const Vector& x) const {
  std::vector<double> values(coords.size());
  for (size_t i = 0; i < coords.size(); ++i) values[i] = x[coords[i]];
  return fn(values);
}

std::vector<ApproxRow> approx_study(const SparseTarget& target,
                                    const std::vector<int>& widths, int n_seeds,
                                    int grid_size, const ApproxStudyConfig& cfg) {
  if (target.input_dim < 1 || target.coords.empty() || !target.fn)
    throw std::invalid_argument("approx_study: incomplete target");
  for (int c : target.coords)
    if (c < 0 || c >= target.input_dim)
      throw std::invalid_argument("approx_study: target coordinate out of range");
  if (widths.empty() || n_seeds < 1 || grid_size < 2)
    throw std::invalid_argument("approx_study: bad study parameters");
  const int k = static_cast<int>(target.coords.size());
  if (k > 3) throw std::invalid_argument("approx_study: dense grids support k <= 3");

  const long m = target.input_dim;
  const double half_width = target.radius / std::sqrt(static_cast<double>(k));

  // Dense grid on the declared coordinates, zeros elsewhere.
  long n_grid = 1;
  for (int i = 0; i < k; ++i) n_grid *= grid_size;
  Matrix grid = Matrix::Zero(n_grid, m);
  Vector grid_truth(n_grid);
  for (long g = 0; g < n_grid; ++g) {
    long rest = g;
    for (int i = 0; i < k; ++i) {
      long cell = rest % grid_size;
      rest /= grid_size;
      double frac = static_cast<double>(cell) / static_cast<double>(grid_size - 1);
      grid(g, target.coords[i]) = -half_width + 2.0 * half_width * frac;
    }
    grid_truth[g] = target.evaluate(grid.row(g).transpose());
  }

  std::vector<ApproxRow> rows;
  for (int seed_idx = 0; seed_idx < n_seeds; ++seed_idx) {
    std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(seed_idx);

    // One training sample set per seed, shared by every width.
    Rng data_rng = Rng(seed).fork(7);
    const double train_half_width = half_width * cfg.domain_margin;
    Matrix X(cfg.n_train, m);
    Vector y(cfg.n_train);
    for (long i = 0; i < cfg.n_train; ++i) {
      for (long j = 0; j < m; ++j) X(i, j) = data_rng.uniform(-train_half_width, train_half_width);
      y[i] = target.evaluate(X.row(i).transpose());
    }

    for (int width : widths) {
      TrainConfig tc;
      tc.task = Task::regression;
      tc.hidden_widths = {width};
      tc.epochs = cfg.epochs;
      tc.batch_size = cfg.batch_size;
      tc.learning_rate = cfg.learning_rate;
      tc.seed = seed;
      tc.hyper.k = k;
      tc.hyper.lambda_topk = cfg.lambda_topk;
      tc.hyper.lambda_l1 = cfg.lambda_l1;

      TrainResult fit = train(X, y, tc);
      if (cfg.refine_epochs > 0) {
        TrainConfig refine = tc;
        refine.epochs = cfg.refine_epochs;
        refine.hyper.lambda_l1 = 0.0;
        fit = train(X, y, refine, fit.params);
      }
      Vector approx = forward(fit.params, grid, /*masked=*/true, k).col(0);
      double sup = (grid_truth - approx).lpNorm<Eigen::Infinity>();
      rows.push_back({width, seed, sup});
    }
  }
  return rows;
}

}  // namespace topkfs
