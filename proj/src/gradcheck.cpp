#include "topkfs/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace topkfs {

Vector central_difference_gradient(const std::function<double(const Vector&)>& f,
                                   const Vector& x, double h) {
  Vector grad(x.size());
  Vector probe = x;
  for (long j = 0; j < x.size(); ++j) {
    double step = h * std::max(1.0, std::abs(x[j]));
    probe[j] = x[j] + step;
    double up = f(probe);
    probe[j] = x[j] - step;
    double down = f(probe);
    probe[j] = x[j];
    grad[j] = (up - down) / (2.0 * step);
  }
  return grad;
}

double gradient_rel_error(const Vector& analytic, const Vector& numeric) {
  double scale = std::max({1.0, analytic.lpNorm<Eigen::Infinity>(),
                           numeric.lpNorm<Eigen::Infinity>()});
  return (analytic - numeric).lpNorm<Eigen::Infinity>() / scale;
}

WeightVector tie_free_weights(Rng& rng, long m, double floor, double gap) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    WeightVector w(m);
    for (long j = 0; j < m; ++j) w[j] = rng.normal();
    std::vector<double> mags(m);
    for (long j = 0; j < m; ++j) mags[j] = std::abs(w[j]);
    std::sort(mags.begin(), mags.end());
    bool ok = mags[0] >= floor;
    for (long j = 0; ok && j + 1 < m; ++j) ok = mags[j + 1] - mags[j] >= gap;
    if (ok) return w;
  }
  throw std::logic_error("tie_free_weights: failed to find a tie-free point");
}

namespace {

std::string case_name(const std::string& prefix, double lambda_topk, int k, int repeat) {
  return prefix + " lambda_topk=" + std::to_string(lambda_topk) + " k=" + std::to_string(k) +
         " rep=" + std::to_string(repeat);
}

void add_case(GradCheckReport& report, std::string name, double rel_error, double tolerance) {
  GradCheckCase c{std::move(name), rel_error, tolerance, rel_error < tolerance};
  report.max_rel_error = std::max(report.max_rel_error, rel_error);
  report.pass = report.pass && c.pass;
  report.cases.push_back(std::move(c));
}

// --- MLP instance construction -------------------------------------------

struct MlpInstance {
  MlpParams params;
  Matrix X;
  Vector y;
  TrainConfig cfg;
};

Vector pack(const MlpParams& params) {
  long total = params.w.size();
  for (const Matrix& layer : params.layers) total += layer.size();
  Vector flat(total);
  long at = 0;
  flat.segment(0, params.w.size()) = params.w;
  at += params.w.size();
  for (const Matrix& layer : params.layers) {
    flat.segment(at, layer.size()) = Eigen::Map<const Vector>(layer.data(), layer.size());
    at += layer.size();
  }
  return flat;
}

MlpParams unpack(const Vector& flat, const MlpParams& shape) {
  MlpParams params = shape;
  long at = 0;
  params.w = flat.segment(0, shape.w.size());
  at += shape.w.size();
  for (size_t i = 0; i < shape.layers.size(); ++i) {
    params.layers[i] = Eigen::Map<const Matrix>(flat.data() + at, shape.layers[i].rows(),
                                                shape.layers[i].cols());
    at += shape.layers[i].size();
  }
  return params;
}

double min_preactivation(const MlpParams& params, const Matrix& X, int k) {
  double lowest = std::numeric_limits<double>::infinity();
  for (bool masked : {false, true}) {
    WeightVector w_eff =
        masked ? apply_mask(params.w, active_set(params.w, k)) : params.w;
    Matrix a = X.array().rowwise() * w_eff.transpose().array();
    for (size_t i = 0; i + 1 < params.layers.size(); ++i) {
      Matrix design(a.rows(), a.cols() + 1);
      design.leftCols(a.cols()) = a;
      design.col(a.cols()).setOnes();
      Matrix z = design * params.layers[i];
      lowest = std::min(lowest, z.cwiseAbs().minCoeff());
      a = z.cwiseMax(0.0);
    }
  }
  return lowest;
}

MlpInstance make_mlp_instance(Rng& rng, Task task, double lambda_topk, int k) {
  const long n = 10, m = 6;
  MlpInstance inst;
  inst.cfg.task = task;
  inst.cfg.n_classes = task == Task::multiclass ? 3 : 2;
  inst.cfg.hidden_widths = {8, 4};
  inst.cfg.hyper.k = k;
  inst.cfg.hyper.lambda_topk = lambda_topk;
  inst.cfg.hyper.lambda_l1 = 0.1;
  inst.cfg.hyper.lambda_l2 = 0.2;

  for (int attempt = 0; attempt < 200; ++attempt) {
    inst.params = init_params(m, inst.cfg, rng);
    inst.params.w = tie_free_weights(rng, m);
    // Random biases so no pre-activation sits on a relu kink.
    for (size_t i = 0; i + 1 < inst.params.layers.size(); ++i)
      for (long c = 0; c < inst.params.layers[i].cols(); ++c)
        inst.params.layers[i](inst.params.layers[i].rows() - 1, c) = 0.3 * rng.normal();

    inst.X.resize(n, m);
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < m; ++j) inst.X(i, j) = rng.normal();
    inst.y.resize(n);
    for (long i = 0; i < n; ++i) {
      switch (task) {
        case Task::regression: inst.y[i] = rng.normal(); break;
        case Task::binary: inst.y[i] = rng.uniform() < 0.5 ? 0.0 : 1.0; break;
        case Task::multiclass: inst.y[i] = static_cast<double>(rng.uniform_index(3)); break;
      }
    }
    if (task == Task::binary) {
      inst.y[0] = 0.0;
      inst.y[1] = 1.0;
    }
    if (min_preactivation(inst.params, inst.X, k) > 1e-3) return inst;
  }
  throw std::logic_error("make_mlp_instance: no kink-free instance found");
}

}  // namespace

GradCheckReport gradcheck_linear(std::uint64_t seed, double tolerance) {
  GradCheckReport report;
  Rng rng(seed);
  const long n = 12, m = 7;

  for (double lambda_topk : {0.0, 0.5}) {
    for (int k : {1, static_cast<int>((m + 1) / 2), static_cast<int>(m)}) {
      for (int repeat = 0; repeat < 3; ++repeat) {
        Matrix X(n, m);
        for (long i = 0; i < n; ++i)
          for (long j = 0; j < m; ++j) X(i, j) = rng.normal();
        Vector y(n);
        for (long i = 0; i < n; ++i) y[i] = rng.normal();
        WeightVector w = tie_free_weights(rng, m);

        Hyperparams h;
        h.lambda_topk = lambda_topk;
        h.k = k;
        h.lambda_l2 = 0.3;
        h.l2_squared = repeat == 2;

        Vector analytic = smooth_gradient(X, y, w, h);
        Vector numeric = central_difference_gradient(
            [&](const Vector& point) { return smooth_objective_value(X, y, point, h); }, w,
            1e-6);
        add_case(report, case_name("linear", lambda_topk, k, repeat),
                 gradient_rel_error(analytic, numeric), tolerance);
      }
    }
  }
  return report;
}

GradCheckReport gradcheck_mlp(std::uint64_t seed, double tolerance) {
  GradCheckReport report;
  Rng rng(seed);
  const int m = 6;

  for (Task task : {Task::regression, Task::binary, Task::multiclass}) {
    for (double lambda_topk : {0.0, 0.5}) {
      for (int k : {1, m / 2, m}) {
        MlpInstance inst = make_mlp_instance(rng, task, lambda_topk, k);
        MlpGrads grads = backward(inst.params, inst.X, inst.y, inst.cfg);

        Vector analytic = pack(inst.params);
        analytic.segment(0, inst.params.w.size()) = grads.dw;
        long at = inst.params.w.size();
        for (const Matrix& dlayer : grads.dlayers) {
          analytic.segment(at, dlayer.size()) =
              Eigen::Map<const Vector>(dlayer.data(), dlayer.size());
          at += dlayer.size();
        }

        Vector flat = pack(inst.params);
        Vector numeric = central_difference_gradient(
            [&](const Vector& point) {
              MlpParams probe = unpack(point, inst.params);
              return loss(probe, inst.X, inst.y, inst.cfg);
            },
            flat, 1e-5);

        add_case(report, case_name("mlp " + to_string(task), lambda_topk, k, 0),
                 gradient_rel_error(analytic, numeric), tolerance);
      }
    }
  }
  return report;
}

}  // namespace topkfs
