#include "topkfs/linear.hpp"

#include <cmath>

#include "topkfs/rng.hpp"

namespace topkfs {

namespace {

void check_shapes(const Matrix& X, const Vector& y, const WeightVector& w) {
  if (y.size() != X.rows()) throw std::invalid_argument("|y| != rows of X");
  if (w.size() != X.cols()) throw std::invalid_argument("|w| != cols of X");
}

double l2_term(const WeightVector& w, const Hyperparams& h) {
  return h.l2_squared ? w.squaredNorm() : w.norm();
}

Vector l2_gradient(const WeightVector& w, const Hyperparams& h) {
  if (h.l2_squared) return 2.0 * w;
  double norm = w.norm();
  if (norm == 0.0) return Vector::Zero(w.size());
  return w / norm;
}

}  // namespace

double soft_threshold(double x, double t) {
  if (t < 0) throw std::invalid_argument("soft_threshold: t must be >= 0");
  double mag = std::abs(x) - t;
  if (mag <= 0) return 0.0;
  return x < 0 ? -mag : mag;
}

double smooth_objective_value(const Matrix& X, const Vector& y, const WeightVector& w,
                              const Hyperparams& h) {
  check_shapes(X, y, w);
  double value = (y - X * w).squaredNorm();
  if (h.lambda_topk != 0.0) {
    WeightVector masked = apply_mask(w, active_set(w, h.k));
    value += h.lambda_topk * (y - X * masked).squaredNorm();
  }
  value += h.lambda_l2 * l2_term(w, h);
  return value;
}

double objective_value(const Matrix& X, const Vector& y, const WeightVector& w,
                       const Hyperparams& h) {
  return smooth_objective_value(X, y, w, h) + h.lambda_l1 * w.lpNorm<1>();
}

Vector smooth_gradient(const Matrix& X, const Vector& y, const WeightVector& w,
                       const Hyperparams& h) {
  check_shapes(X, y, w);
  Vector grad = 2.0 * (X.transpose() * (X * w - y));
  if (h.lambda_topk != 0.0) {
    ActiveSet s = active_set(w, h.k);
    WeightVector masked = apply_mask(w, s);
    Vector masked_grad = 2.0 * (X.transpose() * (X * masked - y));
    grad += route_gradient(masked_grad, s, h.lambda_topk);
  }
  grad += h.lambda_l2 * l2_gradient(w, h);
  return grad;
}

double power_iteration_lmax(const Matrix& X, std::uint64_t seed, int iters) {
  Rng rng(seed);
  Vector v(X.cols());
  for (long j = 0; j < v.size(); ++j) v[j] = rng.normal();
  double norm = v.norm();
  if (norm == 0.0) {
    v.setOnes();
    norm = v.norm();
  }
  v /= norm;
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vector next = X.transpose() * (X * v);
    double next_norm = next.norm();
    if (next_norm == 0.0) return 0.0;  // X is identically zero
    lambda = v.dot(next);
    v = next / next_norm;
  }
  return lambda;
}

namespace {

// Shared proximal-gradient engine. The masked term only exists on the
// topk_enabled path, so the plain elastic-net solver runs an identical
// instruction stream to fit() with lambda_topk = 0.
LinearFit prox_solve(const Matrix& X, const Vector& y, const Hyperparams& h,
                     std::uint64_t seed, bool topk_enabled) {
  h.validate();
  if (X.rows() < 1 || X.cols() < 1) throw std::invalid_argument("fit: empty data");
  if (!all_finite(X) || !all_finite(y)) throw std::invalid_argument("fit: non-finite data");

  Hyperparams smooth_h = h;
  if (!topk_enabled) smooth_h.lambda_topk = 0.0;

  double step = h.step;
  if (step == 0.0) {
    double lmax = power_iteration_lmax(X, seed);
    double lipschitz = 2.0 * (1.0 + smooth_h.lambda_topk) * lmax;
    step = lipschitz > 0 ? 1.0 / lipschitz : 1.0;
  }
  const double step0 = step;

  const long m = X.cols();
  WeightVector w = WeightVector::Zero(m);
  LinearFit result;
  result.objective_trace.reserve(h.max_iters + 1);

  double objective = objective_value(X, y, w, smooth_h);
  result.objective_trace.push_back(objective);

  for (long iter = 0; iter < h.max_iters; ++iter) {
    if (!std::isfinite(objective))
      throw NumericalError("fit: objective is not finite", iter);

    Vector grad = smooth_gradient(X, y, w, smooth_h);
    WeightVector candidate;
    double candidate_objective;

    if (h.backtracking) {
      bool accepted = false;
      for (int halvings = 0; halvings < 60; ++halvings) {
        candidate = w - step * grad;
        for (long j = 0; j < m; ++j)
          candidate[j] = soft_threshold(candidate[j], step * h.lambda_l1);
        candidate_objective = objective_value(X, y, candidate, smooth_h);
        if (candidate_objective <= objective) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        // No descent at the smallest step: stay put, which terminates below.
        candidate = w;
        candidate_objective = objective;
      }
    } else {
      candidate = w - step * grad;
      for (long j = 0; j < m; ++j)
        candidate[j] = soft_threshold(candidate[j], step * h.lambda_l1);
      candidate_objective = objective_value(X, y, candidate, smooth_h);
      if (!std::isfinite(candidate_objective))
        throw NumericalError("fit: objective diverged", iter);
    }

    double change = std::abs(objective - candidate_objective);
    w = candidate;
    objective = candidate_objective;
    result.objective_trace.push_back(objective);
    result.iterations = iter + 1;

    if (change <= h.tol * std::max(1.0, std::abs(objective))) {
      result.converged = true;
      break;
    }
    if (h.backtracking) step = std::min(2.0 * step, step0);
  }

  result.weights = std::move(w);
  result.active_set_final = active_set(result.weights, h.k);
  return result;
}

}  // namespace

LinearFit fit(const Matrix& X, const Vector& y, const Hyperparams& h, std::uint64_t seed) {
  return prox_solve(X, y, h, seed, h.lambda_topk != 0.0);
}

LinearFit fit_elastic_net(const Matrix& X, const Vector& y, const Hyperparams& h,
                          std::uint64_t seed) {
  return prox_solve(X, y, h, seed, false);
}

Vector predict(const Matrix& X, const WeightVector& w) {
  if (w.size() != X.cols()) throw std::invalid_argument("predict: |w| != cols of X");
  return X * w;
}

}  // namespace topkfs
