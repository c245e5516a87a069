#include "topkfs/topk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <numeric>

namespace topkfs {

std::string to_string(Task t) {
  switch (t) {
    case Task::regression: return "regression";
    case Task::binary: return "binary";
    case Task::multiclass: return "multiclass";
  }
  return "regression";
}

Task task_from_string(const std::string& s) {
  if (s == "regression") return Task::regression;
  if (s == "binary") return Task::binary;
  if (s == "multiclass") return Task::multiclass;
  throw ConfigError("unknown task: '" + s + "'");
}

void warn(const std::string& msg) { std::cerr << "[topkfs] warning: " << msg << "\n"; }

std::string double_to_string(double v) {
  char buf[40];
  for (int precision : {15, 16, 17}) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

bool all_finite(const Vector& v) { return v.allFinite(); }
bool all_finite(const Matrix& m) { return m.allFinite(); }

void Hyperparams::validate() const {
  if (lambda_l1 < 0 || lambda_l2 < 0 || lambda_topk < 0)
    throw ConfigError("regularization strengths must be nonnegative");
  if (k < 1) throw ConfigError("k must be >= 1");
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (tol <= 0) throw ConfigError("tol must be > 0");
  if (step < 0) throw ConfigError("step must be >= 0 (0 = auto)");
}

bool ActiveSet::contains(int i) const {
  return std::binary_search(indices.begin(), indices.end(), i);
}

ActiveSet active_set(const WeightVector& w, int k) {
  const int m = static_cast<int>(w.size());
  if (m < 1) throw std::invalid_argument("active_set: empty weight vector");
  if (k < 1) throw std::invalid_argument("active_set: k must be >= 1");
  if (!all_finite(w)) throw std::invalid_argument("active_set: non-finite weights");

  ActiveSet s;
  s.k_requested = k;
  if (k > m) {
    warn("active_set: k=" + std::to_string(k) + " clamped to m=" + std::to_string(m));
    k = m;
  }

  s.indices.resize(m);
  std::iota(s.indices.begin(), s.indices.end(), 0);
  if (k < m) {
    // Strict total order: larger magnitude first, lower index wins ties.
    auto before = [&w](int a, int b) {
      double ma = std::abs(w[a]), mb = std::abs(w[b]);
      return ma > mb || (ma == mb && a < b);
    };
    std::nth_element(s.indices.begin(), s.indices.begin() + (k - 1), s.indices.end(), before);
    s.indices.resize(k);
  }
  std::sort(s.indices.begin(), s.indices.end());
  return s;
}

WeightVector apply_mask(const WeightVector& w, const ActiveSet& s) {
  const int m = static_cast<int>(w.size());
  WeightVector out = WeightVector::Zero(m);
  for (int i : s.indices) {
    if (i < 0 || i >= m) throw std::invalid_argument("apply_mask: index out of range");
    out[i] = w[i];
  }
  return out;
}

Vector route_gradient(const Vector& g_lead, const ActiveSet& s, double factor) {
  const int m = static_cast<int>(g_lead.size());
  Vector out = Vector::Zero(m);
  for (int i : s.indices) {
    if (i < 0 || i >= m) throw std::invalid_argument("route_gradient: index out of range");
    out[i] = factor * g_lead[i];
  }
  return out;
}

}  // namespace topkfs
