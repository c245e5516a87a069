#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace topkfs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// One scalar weight per feature; the selection machinery ranks |w_i|.
using WeightVector = Vector;

enum class Task { regression, binary, multiclass };

std::string to_string(Task t);
Task task_from_string(const std::string& s);

// Bad configuration, malformed input files, shape mismatches.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Divergence or NaN during optimization; carries the iteration it happened at.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& msg, long iteration)
      : std::runtime_error(msg + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

// Non-fatal diagnostics go to stderr so result files stay deterministic.
void warn(const std::string& msg);

// Shortest decimal form that parses back to exactly the same double.
std::string double_to_string(double v);

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

// Regularization strengths and solver knobs shared by the linear and MLP
// objectives. lambda_topk weights the masked (top-k) fitting term.
struct Hyperparams {
  double lambda_l2 = 0.0;    // strength on ||w||_2 (or its square, see l2_squared)
  double lambda_l1 = 0.0;    // strength on ||w||_1
  double lambda_topk = 0.0;  // strength on the masked fitting term
  int k = 1;
  long max_iters = 10000;
  double tol = 1e-8;     // relative objective change
  double step = 0.0;     // initial step size; 0 = auto (1/L from power iteration)
  bool backtracking = true;
  bool l2_squared = false;  // use lambda_l2*||w||_2^2 instead of the plain norm

  void validate() const;
};

}  // namespace topkfs
