#pragma once

#include <functional>

#include "topkfs/linear.hpp"
#include "topkfs/mlp.hpp"

namespace topkfs {

// Central finite differences with per-coordinate step h * max(1, |x_j|).
Vector central_difference_gradient(const std::function<double(const Vector&)>& f,
                                   const Vector& x, double h);

// max_j |a_j - b_j| / max(1, ||a||_inf, ||b||_inf)
double gradient_rel_error(const Vector& analytic, const Vector& numeric);

struct GradCheckCase {
  std::string name;
  double rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct GradCheckReport {
  std::vector<GradCheckCase> cases;
  double max_rel_error = 0.0;
  bool pass = true;
};

// Randomized instances at tie-free points (clear magnitude gap at rank k, no
// coordinate near zero), swept over lambda_topk in {0, 0.5} and
// k in {1, ceil(m/2), m}, both l2 forms.
GradCheckReport gradcheck_linear(std::uint64_t seed, double tolerance = 1e-6);

// Same sweep for the MLP across all three tasks; instances are regenerated
// until every pre-activation clears the relu kink by a margin.
GradCheckReport gradcheck_mlp(std::uint64_t seed, double tolerance = 1e-4);

// Weights with |w_i| >= floor and a magnitude gap > gap at every rank, so
// active sets are stable under finite-difference perturbation.
WeightVector tie_free_weights(Rng& rng, long m, double floor = 0.05, double gap = 0.02);

}  // namespace topkfs
