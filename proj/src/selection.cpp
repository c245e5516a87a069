#include "topkfs/selection.hpp"

#include <chrono>
#include <cstdio>
#include <set>

namespace topkfs {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::lasso: return "lasso";
    case ModelKind::ridge: return "ridge";
    case ModelKind::enet: return "enet";
    case ModelKind::mlp_reg: return "mlp_reg";
    case ModelKind::mlp_clf: return "mlp_clf";
  }
  return "enet";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "lasso") return ModelKind::lasso;
  if (s == "ridge") return ModelKind::ridge;
  if (s == "enet") return ModelKind::enet;
  if (s == "mlp_reg") return ModelKind::mlp_reg;
  if (s == "mlp_clf") return ModelKind::mlp_clf;
  throw ConfigError("unknown model kind: '" + s + "'");
}

bool is_linear(ModelKind kind) {
  return kind == ModelKind::lasso || kind == ModelKind::ridge || kind == ModelKind::enet;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

namespace {

std::string format_double(double v) { return double_to_string(v); }

Hyperparams effective_hyperparams(const SelectConfig& cfg) {
  Hyperparams h = cfg.train.hyper;
  if (cfg.kind == ModelKind::lasso) h.lambda_l2 = 0.0;
  if (cfg.kind == ModelKind::ridge) h.lambda_l1 = 0.0;
  if (!cfg.use_topk) h.lambda_topk = 0.0;
  return h;
}

std::string canonical_settings(const SelectConfig& cfg) {
  const Hyperparams& h = cfg.train.hyper;
  const TrainConfig& t = cfg.train;
  std::string s;
  s += "kind=" + to_string(cfg.kind);
  s += ";topk=" + std::to_string(cfg.use_topk ? 1 : 0);
  s += ";lambda_l2=" + format_double(h.lambda_l2);
  s += ";lambda_l1=" + format_double(h.lambda_l1);
  s += ";lambda_topk=" + format_double(h.lambda_topk);
  s += ";k=" + std::to_string(h.k);
  s += ";max_iters=" + std::to_string(h.max_iters);
  s += ";tol=" + format_double(h.tol);
  s += ";step=" + format_double(h.step);
  s += ";backtracking=" + std::to_string(h.backtracking ? 1 : 0);
  s += ";l2_squared=" + std::to_string(h.l2_squared ? 1 : 0);
  s += ";epochs=" + std::to_string(t.epochs);
  s += ";batch_size=" + std::to_string(t.batch_size);
  s += ";optimizer=" + std::string(t.optimizer == Optimizer::adam ? "adam" : "sgd");
  s += ";learning_rate=" + format_double(t.learning_rate);
  s += ";beta1=" + format_double(t.beta1);
  s += ";beta2=" + format_double(t.beta2);
  s += ";hidden=";
  for (size_t i = 0; i < t.hidden_widths.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(t.hidden_widths[i]);
  }
  s += ";hidden_decay=" + format_double(t.hidden_decay);
  s += ";standardize=" + std::to_string(cfg.standardize ? 1 : 0);
  s += ";split_ratio=" + format_double(cfg.split_ratio);
  return s;
}

}  // namespace

std::string config_fingerprint(const SelectConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_settings(cfg))));
  return buf;
}

SelectionReport select(const Dataset& d, const SelectConfig& cfg) {
  d.validate();
  bool regression_model = is_linear(cfg.kind) || cfg.kind == ModelKind::mlp_reg;
  if (regression_model && d.task != Task::regression)
    throw ConfigError("model kind " + to_string(cfg.kind) + " requires a regression dataset");
  if (cfg.kind == ModelKind::mlp_clf && d.task == Task::regression)
    throw ConfigError("mlp_clf requires a classification dataset");

  Hyperparams h = effective_hyperparams(cfg);
  SelectionReport report;
  report.kind = cfg.kind;
  report.use_topk = cfg.use_topk;
  report.k = h.k;
  report.seed = cfg.train.seed;
  report.fingerprint = config_fingerprint(cfg);

  auto start = std::chrono::steady_clock::now();
  if (is_linear(cfg.kind)) {
    LinearFit fitted = cfg.use_topk ? fit(d.X, d.y, h, cfg.train.seed)
                                    : fit_elastic_net(d.X, d.y, h, cfg.train.seed);
    report.weights = std::move(fitted.weights);
    report.converged = fitted.converged;
    report.iterations = fitted.iterations;
  } else {
    TrainConfig tc = cfg.train;
    tc.hyper = h;
    tc.task = d.task;
    tc.n_classes = d.n_classes;
    TrainResult trained = cfg.use_topk ? train(d.X, d.y, tc) : train_plain(d.X, d.y, tc);
    report.weights = std::move(trained.params.w);
    report.iterations = cfg.train.epochs;
  }
  report.train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  report.selected = active_set(report.weights, h.k);
  report.degenerate_all_zero = report.weights.lpNorm<Eigen::Infinity>() == 0.0;
  return report;
}

double jaccard_similarity(const std::vector<int>& a, const std::vector<int>& b) {
  std::set<int> u(a.begin(), a.end());
  long inter = 0;
  for (int i : b) inter += u.count(i) ? 1 : 0;
  u.insert(b.begin(), b.end());
  if (u.empty()) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(u.size());
}

StabilityResult stability(const Dataset& d, const SelectConfig& cfg, int n_splits,
                          double ratio) {
  if (n_splits < 2) throw std::invalid_argument("stability: need >= 2 splits");
  StabilityResult result;
  for (int i = 0; i < n_splits; ++i) {
    std::uint64_t seed_i = cfg.train.seed + static_cast<std::uint64_t>(i);
    auto [train_part, test_part] = split(d, ratio, seed_i);
    if (cfg.standardize) standardize(train_part);
    SelectConfig run_cfg = cfg;
    run_cfg.train.seed = seed_i;
    result.reports.push_back(select(train_part, run_cfg));
  }

  result.jaccard.resize(n_splits, n_splits);
  double total = 0.0;
  long pairs = 0;
  for (int i = 0; i < n_splits; ++i) {
    for (int j = 0; j < n_splits; ++j) {
      double value = jaccard_similarity(result.reports[i].selected.indices,
                                        result.reports[j].selected.indices);
      result.jaccard(i, j) = value;
      if (i < j) {
        total += value;
        pairs++;
      }
    }
  }
  result.mean_jaccard = pairs > 0 ? total / static_cast<double>(pairs) : 1.0;
  return result;
}

std::vector<SweepRow> sweep_k(const Dataset& d, const SelectConfig& cfg,
                              const std::vector<int>& k_values) {
  if (k_values.empty()) throw std::invalid_argument("sweep_k: empty k_values");
  for (int k : k_values)
    if (k < 1) throw std::invalid_argument("sweep_k: k values must be >= 1");

  auto [train_part, test_part] = split(d, cfg.split_ratio, cfg.train.seed);
  if (cfg.standardize) standardize(train_part, test_part);

  std::vector<SweepRow> rows;
  for (int k : k_values) {
    SelectConfig run_cfg = cfg;
    run_cfg.train.hyper.k = k;
    SweepRow row;
    row.k = k;
    row.report = select(train_part, run_cfg);

    const std::vector<int>& cols = row.report.selected.indices;
    Dataset train_sel = select_columns(train_part, cols);
    Dataset test_sel = select_columns(test_part, cols);
    if (d.task == Task::regression) {
      OlsModel downstream = ols_fit(train_sel.X, train_sel.y);
      row.metrics = regression_metrics(test_sel.y, downstream.predict(test_sel.X));
    } else {
      ExtraTrees downstream =
          extra_trees_fit(train_sel.X, train_sel.y, 100, Rng(cfg.train.seed).fork(3).next_u64());
      row.metrics["accuracy"] = accuracy(test_sel.y, downstream.predict(test_sel.X));
    }
    if (d.informative) {
      SelectionScore score = f1_selection(row.report.selected, *d.informative);
      row.metrics["f1_selection"] = score.f1;
      row.metrics["precision"] = score.precision;
      row.metrics["recall"] = score.recall;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace topkfs
