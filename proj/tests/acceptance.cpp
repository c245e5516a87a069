// Acceptance suite: one gate per guarantee the library makes, one pass/fail
// line each. Exits nonzero if any hard gate fails; the stability diagnostic
// is a soft gate that reports a note instead of failing the build.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "topkfs/experiment.hpp"
#include "topkfs/gradcheck.hpp"

using namespace topkfs;
namespace fs = std::filesystem;

namespace {

struct Gate {
  std::string label;
  bool pass = false;
  bool soft = false;
  std::string detail;
  double seconds = 0.0;
};

std::vector<Gate> gates;

void run_gate(const std::string& label, bool soft, const std::function<bool(std::string&)>& body) {
  Gate gate;
  gate.label = label;
  gate.soft = soft;
  auto t0 = std::chrono::steady_clock::now();
  try {
    gate.pass = body(gate.detail);
  } catch (const std::exception& e) {
    gate.pass = false;
    gate.detail = std::string("exception: ") + e.what();
  }
  gate.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  gates.push_back(gate);
  const char* tag = gate.pass ? "[PASS]" : (gate.soft ? "[NOTE]" : "[FAIL]");
  std::printf("%s %s (%.2f s)%s%s\n", tag, gate.label.c_str(), gate.seconds,
              gate.detail.empty() ? "" : " — ", gate.detail.c_str());
  std::fflush(stdout);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// ---- gate bodies -----------------------------------------------------------

bool operator_oracle(std::string& detail) {
  Rng rng(2025);
  long checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    long m = 1 + static_cast<long>(rng.uniform_index(64));
    Vector w(m);
    for (long j = 0; j < m; ++j)
      w[j] = std::round(rng.normal() * 4.0) / 4.0;  // coarse grid forces ties
    for (int k = 1; k <= m; ++k) {
      if (active_set(w, k).indices != oracle::sorted_top_k(w, k)) {
        detail = "mismatch at trial " + std::to_string(trial) + ", k=" + std::to_string(k);
        return false;
      }
      ++checked;
    }
  }
  detail = std::to_string(checked) + " (vector, k) pairs, exact set equality";
  return true;
}

bool gradient_fidelity(std::string& detail) {
  GradCheckReport linear_report = gradcheck_linear(90210, 1e-6);
  GradCheckReport mlp_report = gradcheck_mlp(90210, 1e-4);
  detail = "max rel error: linear " + fmt(linear_report.max_rel_error) + " (tol 1e-6), mlp " +
           fmt(mlp_report.max_rel_error) + " (tol 1e-4)";
  return linear_report.pass && mlp_report.pass;
}

bool reduction_identities(std::string& detail) {
  Rng rng(11);
  Matrix X(30, 8);
  for (long i = 0; i < X.size(); ++i) X(i) = rng.normal();
  Vector y(30);
  for (long i = 0; i < 30; ++i) y[i] = rng.normal();

  // lambda_topk = 0 must be bit-identical to the plain elastic-net engine.
  Hyperparams h;
  h.lambda_l1 = 0.4;
  h.lambda_l2 = 0.2;
  h.lambda_topk = 0.0;
  h.k = 3;
  h.max_iters = 300;
  LinearFit a = fit(X, y, h, 5);
  LinearFit b = fit_elastic_net(X, y, h, 5);
  bool linear_bits =
      std::memcmp(a.weights.data(), b.weights.data(), sizeof(double) * a.weights.size()) == 0 &&
      a.objective_trace == b.objective_trace;

  // Same for the MLP trainer against its plain path.
  Dataset blobs = oracle::two_blobs(40, 5, 3.0, 7);
  TrainConfig tc;
  tc.task = Task::binary;
  tc.epochs = 25;
  tc.seed = 3;
  tc.hidden_widths = {8};
  tc.hyper.lambda_topk = 0.0;
  tc.hyper.k = 2;
  tc.hyper.lambda_l1 = 0.05;
  TrainResult ta = train(blobs.X, blobs.y, tc);
  TrainResult tb = train_plain(blobs.X, blobs.y, tc);
  bool mlp_bits = std::memcmp(ta.params.w.data(), tb.params.w.data(),
                              sizeof(double) * ta.params.w.size()) == 0;
  for (size_t i = 0; i < ta.params.layers.size(); ++i)
    mlp_bits = mlp_bits && std::memcmp(ta.params.layers[i].data(), tb.params.layers[i].data(),
                                       sizeof(double) * ta.params.layers[i].size()) == 0;

  // k = m: objective (1 + lambda) * lead + penalties, gradient equality, 1e-12.
  Hyperparams full;
  full.lambda_topk = 0.8;
  full.k = 8;
  full.lambda_l1 = 0.3;
  full.lambda_l2 = 0.1;
  Vector w(8);
  for (long j = 0; j < 8; ++j) w[j] = rng.normal();
  double lead = (y - X * w).squaredNorm();
  double expected_obj = (1 + 0.8) * lead + 0.3 * w.lpNorm<1>() + 0.1 * w.norm();
  double obj = objective_value(X, y, w, full);
  bool obj_ok = std::abs(obj - expected_obj) <= 1e-12 * std::max(1.0, std::abs(expected_obj));

  Vector lead_grad = 2.0 * X.transpose() * (X * w - y);
  Vector expected_grad = (1 + 0.8) * lead_grad + 0.1 * w / w.norm();
  Vector grad = smooth_gradient(X, y, w, full);
  double grad_err = (grad - expected_grad).lpNorm<Eigen::Infinity>() /
                    std::max(1.0, expected_grad.lpNorm<Eigen::Infinity>());
  bool grad_ok = grad_err <= 1e-12;

  detail = std::string("linear bits ") + (linear_bits ? "ok" : "DIFFER") + ", mlp bits " +
           (mlp_bits ? "ok" : "DIFFER") + ", k=m objective " + (obj_ok ? "ok" : "off") +
           ", gradient rel err " + fmt(grad_err);
  return linear_bits && mlp_bits && obj_ok && grad_ok;
}

bool monotone_descent(std::string& detail) {
  Rng rng(13);
  double worst_rise = 0.0;
  int full_traces = 0;
  for (int instance = 0; instance < 20; ++instance) {
    // Underdetermined, strongly correlated designs so most fits really use
    // the whole iteration budget.
    long n = 60 + static_cast<long>(rng.uniform_index(40));
    long m = 200 + static_cast<long>(rng.uniform_index(80));
    Matrix X(n, m);
    for (long i = 0; i < n; ++i) {
      double common = rng.normal();
      for (long j = 0; j < m; ++j) X(i, j) = 0.97 * common + 0.25 * rng.normal();
    }
    Vector y(n);
    for (long i = 0; i < n; ++i) y[i] = rng.normal();

    Hyperparams h;
    h.lambda_l1 = 0.02;
    h.lambda_l2 = 0.02;
    h.lambda_topk = 1.0;
    h.k = static_cast<int>(m / 4);
    h.max_iters = 500;
    h.tol = 1e-300;  // only an exact fixed point may stop early
    LinearFit fitted = fit(X, y, h, instance);
    bool full = fitted.objective_trace.size() == 501;
    full_traces += full ? 1 : 0;
    if (!full && !fitted.converged) {
      detail = "instance " + std::to_string(instance) + " stopped early without converging";
      return false;
    }
    for (size_t t = 1; t < fitted.objective_trace.size(); ++t)
      worst_rise = std::max(worst_rise,
                            fitted.objective_trace[t] - fitted.objective_trace[t - 1]);
  }
  detail = std::to_string(full_traces) + "/20 traces ran all 500 iterations, worst rise " +
           fmt(worst_rise) + " (remainder hit exact fixed points)";
  return worst_rise <= 1e-10 && full_traces >= 15;
}

double selection_f1(const Dataset& d, ModelKind kind, bool topk, std::uint64_t seed, int k) {
  SelectConfig cfg;
  cfg.kind = kind;
  cfg.use_topk = topk;
  cfg.train.seed = seed;
  cfg.train.hyper.k = k;
  cfg.train.hyper.lambda_l1 = 50.0;
  cfg.train.hyper.lambda_l2 = 10.0;
  cfg.train.hyper.lambda_topk = 1.0;
  cfg.train.hyper.max_iters = 20000;
  SelectionReport report = select(d, cfg);
  return f1_selection(report.selected, *d.informative).f1;
}

bool synthetic_recovery(std::string& detail) {
  const int n_seeds = 20;
  std::ostringstream note;
  bool ok = true;
  double enet_topk_median = 0.0;
  for (ModelKind kind : {ModelKind::lasso, ModelKind::ridge, ModelKind::enet}) {
    std::vector<double> plain_f1, topk_f1;
    for (std::uint64_t seed = 0; seed < n_seeds; ++seed) {
      Dataset d = make_sparse_regression(200, 100, 25, 18.0, 777 + seed);
      standardize(d);
      plain_f1.push_back(selection_f1(d, kind, false, seed, 25));
      topk_f1.push_back(selection_f1(d, kind, true, seed, 25));
    }
    double mp = median(plain_f1), mt = median(topk_f1);
    if (kind == ModelKind::enet) enet_topk_median = mt;
    ok = ok && mt >= mp;
    note << to_string(kind) << " " << mp << "/" << mt << " ";
  }
  ok = ok && enet_topk_median >= 0.8;
  detail = "median f1 plain/topk: " + note.str() + "(enet topk >= 0.8: " +
           fmt(enet_topk_median) + ")";
  return ok;
}

bool noise_rejection(std::string& detail) {
  std::ostringstream note;
  bool ok = true;
  for (ModelKind kind : {ModelKind::lasso, ModelKind::enet}) {
    std::vector<double> plain_frac, topk_frac;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Dataset original = make_sparse_regression(200, 30, 10, 5.0, 900 + seed);
      Dataset noisy = inject_noise_features(original, 1900 + seed);
      standardize(noisy);
      auto fraction = [&](bool topk) {
        SelectConfig cfg;
        cfg.kind = kind;
        cfg.use_topk = topk;
        cfg.train.seed = seed;
        cfg.train.hyper.k = 30;
        cfg.train.hyper.lambda_l1 = 50.0;
        cfg.train.hyper.lambda_l2 = 10.0;
        cfg.train.hyper.lambda_topk = 1.0;
        cfg.train.hyper.max_iters = 20000;
        SelectionReport report = select(noisy, cfg);
        long noise_count = 0;
        for (int i : report.selected.indices) noise_count += i >= 30 ? 1 : 0;
        return static_cast<double>(noise_count) / 30.0;
      };
      plain_frac.push_back(fraction(false));
      topk_frac.push_back(fraction(true));
    }
    double mp = median(plain_frac), mt = median(topk_frac);
    ok = ok && mt <= mp;
    note << to_string(kind) << " " << mp << "/" << mt << " ";
  }
  detail = "median noise fraction plain/topk: " + note.str();
  return ok;
}

bool approximation_trend(std::string& detail) {
  SparseTarget target;
  target.input_dim = 20;
  target.coords = {2, 7};
  target.eta = 1.0;
  target.radius = 3.0;
  target.fn = [](const std::vector<double>& x) { return std::sin(x[0] + x[1]); };

  const std::vector<int> widths = {16, 64, 256};
  auto rows = approx_study(target, widths, 5, 32, {});

  std::ostringstream note;
  std::vector<double> medians;
  for (int width : widths) {
    std::vector<double> errors;
    for (const ApproxRow& row : rows)
      if (row.width == width) errors.push_back(row.sup_error);
    medians.push_back(median(errors));
    note << width << ":" << medians.back() << " ";
  }
  bool ok = true;
  for (size_t i = 1; i < medians.size(); ++i) ok = ok && medians[i] <= medians[i - 1];
  detail = "median sup error by width: " + note.str() + "(bound constants not checked)";
  return ok;
}

bool downstream_sanity(std::string& detail) {
  Dataset train_blobs = oracle::two_blobs(100, 5, 6.0, 41);
  Dataset test_blobs = oracle::two_blobs(100, 5, 6.0, 42);
  ExtraTrees trees = extra_trees_fit(train_blobs.X, train_blobs.y, 100, 9);
  double acc = accuracy(test_blobs.y, trees.predict(test_blobs.X));

  Rng rng(43);
  Matrix X(60, 4);
  for (long i = 0; i < X.size(); ++i) X(i) = rng.normal();
  Vector coef(4);
  coef << 1.5, -2.0, 0.5, 3.0;
  Vector y = X * coef + Vector::Constant(60, 0.7);
  OlsModel ols = ols_fit(X, y);
  double ols_mae = mae(y, ols.predict(X));
  double ols_r2 = r2(y, ols.predict(X));

  detail = "extra-trees accuracy " + fmt(acc) + " (need >= 0.95), ols mae " + fmt(ols_mae) +
           ", r2 " + fmt(ols_r2);
  return acc >= 0.95 && ols_mae < 1e-8 && ols_r2 > 1.0 - 1e-8;
}

bool determinism(std::string& detail) {
  fs::path base = fs::temp_directory_path() / "topkfs_acceptance_det";
  fs::remove_all(base);
  long files_compared = 0;

  for (Command command :
       {Command::select, Command::sweep_k, Command::stability, Command::gradcheck}) {
    ExperimentConfig cfg = default_config();
    cfg.command = command;
    cfg.n = 60;
    cfg.m = 16;
    cfg.informative = 4;
    cfg.hyper.k = 4;
    cfg.k_values = {2, 4, 8};
    cfg.splits = 4;
    cfg.seed = 31;
    if (command == Command::stability) {
      cfg.task = "binary";
      cfg.model = "mlp_clf";
      cfg.epochs = 20;
      cfg.hidden = {6};
    }

    cfg.out_dir = (base / "a").string();
    RunOutcome first = run(cfg);
    cfg.out_dir = (base / "b").string();
    RunOutcome second = run(cfg);

    for (const char* name : {"records.jsonl", "summary.txt", "curve.csv"}) {
      if (!fs::exists(first.run_dir / name)) continue;
      if (read_file(first.run_dir / name) != read_file(second.run_dir / name)) {
        detail = std::string(name) + " differs for " + to_string(command);
        return false;
      }
      ++files_compared;
    }
  }
  fs::remove_all(base);
  detail = std::to_string(files_compared) + " result files byte-identical across reruns";
  return true;
}

bool stability_diagnostic(std::string& detail) {
  std::vector<double> topk_means, plain_means;
  for (int rep = 0; rep < 5; ++rep) {
    Dataset d = make_sparse_classification(250, 20, 5, 2, 1.0, 3000 + 17 * rep);
    auto mean_jaccard = [&](bool topk) {
      SelectConfig cfg;
      cfg.kind = ModelKind::mlp_clf;
      cfg.use_topk = topk;
      cfg.train.seed = 5000 + 97 * rep;
      cfg.train.epochs = 500;
      cfg.train.hidden_widths = {12, 6};
      cfg.train.hyper.k = 5;
      cfg.train.hyper.lambda_topk = 1.0;
      cfg.train.hyper.lambda_l1 = 0.05;
      return stability(d, cfg, 10, 0.8).mean_jaccard;
    };
    topk_means.push_back(mean_jaccard(true));
    plain_means.push_back(mean_jaccard(false));
  }
  double mt = median(topk_means), mp = median(plain_means);
  detail = "median mean-Jaccard over 5 repetitions: topk " + fmt(mt) + " vs plain " + fmt(mp);
  if (mt < mp) detail += " — soft criterion below counterpart, investigate";
  return mt >= mp;
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");

  run_gate("1. top-k operator matches the full-sort oracle (m <= 64, all k)", false,
           [](std::string& d) {
             auto t0 = std::chrono::steady_clock::now();
             bool ok = operator_oracle(d);
             double secs =
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
             return ok && secs < 1.0;
           });
  run_gate("2. gradients match central finite differences (linear 1e-6, mlp 1e-4)", false,
           [](std::string& d) {
             auto t0 = std::chrono::steady_clock::now();
             bool ok = gradient_fidelity(d);
             double secs =
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
             return ok && secs < 30.0;
           });
  run_gate("3. lambda_topk = 0 reductions are bit-identical; k = m identities hold to 1e-12",
           false, reduction_identities);
  run_gate("4. backtracking objective trace is non-increasing (20 instances, 500 iterations)",
           false, monotone_descent);
  run_gate("5. top-k variants recover planted features at least as well as plain (20 seeds)",
           false, [](std::string& d) {
             auto t0 = std::chrono::steady_clock::now();
             bool ok = synthetic_recovery(d);
             double secs =
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
             return ok && secs < 300.0;
           });
  run_gate("6. top-k selects no more injected noise features than plain (10 seeds)", false,
           noise_rejection);
  run_gate("7. masked sub-network sup error is non-increasing in width (2-sparse target)",
           false, approximation_trend);
  run_gate("8. downstream evaluators: extra-trees >= 0.95, exact-linear ols near-perfect",
           false, downstream_sanity);
  run_gate("9. rerunning any command with the same config and seed is byte-identical", false,
           determinism);
  run_gate("10. stability: top-k selection overlap at least matches the plain counterpart",
           true, stability_diagnostic);

  bool hard_fail = false;
  for (const Gate& gate : gates) hard_fail = hard_fail || (!gate.pass && !gate.soft);
  std::printf("%s\n", hard_fail ? "ACCEPTANCE: FAIL" : "ACCEPTANCE: PASS");
  return hard_fail ? 1 : 0;
}
