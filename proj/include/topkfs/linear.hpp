#pragma once

#include "topkfs/topk.hpp"
#include "topkfs/types.hpp"

namespace topkfs {

struct LinearFit {
  WeightVector weights;
  std::vector<double> objective_trace;  // objective at w0, w1, ...
  bool converged = false;
  long iterations = 0;
  ActiveSet active_set_final;
};

// sign(x) * max(|x| - t, 0)
double soft_threshold(double x, double t);

// Full objective:
//   ||y - Xw||^2 + lambda_topk * ||y - X mask(w)||^2
//   + lambda_l1 * ||w||_1 + lambda_l2 * l2term(w)
// where mask keeps the top-k magnitudes of w itself, and l2term is ||w||_2
// or its square depending on h.l2_squared.
double objective_value(const Matrix& X, const Vector& y, const WeightVector& w,
                       const Hyperparams& h);

// Objective minus the l1 term (the part handled by the proximal step).
double smooth_objective_value(const Matrix& X, const Vector& y, const WeightVector& w,
                              const Hyperparams& h);

// Gradient of the smooth part with the active set frozen at w:
//   2 X^T (Xw - y) + route(2 X^T (X mask(w) - y), S, lambda_topk) + l2 gradient.
// The l2-norm gradient w/||w||_2 is defined as 0 at w = 0.
Vector smooth_gradient(const Matrix& X, const Vector& y, const WeightVector& w,
                       const Hyperparams& h);

// Proximal gradient on the smooth part plus coordinatewise soft-thresholding.
// The active set is recomputed every iteration. With backtracking enabled the
// step halves until the full objective does not increase, so the trace is
// non-increasing by construction. Stops when the relative objective change
// drops below h.tol or after h.max_iters.
//
// h.step = 0 picks 1/L with L = 2 (1 + lambda_topk) lambda_max(X^T X),
// estimated by power iteration seeded from `seed`.
LinearFit fit(const Matrix& X, const Vector& y, const Hyperparams& h, std::uint64_t seed);

// Plain elastic-net path: identical engine with the masked term compiled out.
// fit() with lambda_topk = 0 produces bit-identical iterates to this.
LinearFit fit_elastic_net(const Matrix& X, const Vector& y, const Hyperparams& h,
                          std::uint64_t seed);

Vector predict(const Matrix& X, const WeightVector& w);

// Largest eigenvalue of X^T X by power iteration (deterministic given seed).
double power_iteration_lmax(const Matrix& X, std::uint64_t seed, int iters = 100);

}  // namespace topkfs
