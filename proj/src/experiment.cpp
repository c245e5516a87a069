#include "topkfs/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "topkfs/gradcheck.hpp"

namespace topkfs {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Stage seeds derived from the run seed so each pipeline step owns an
// independent reproducible stream.
std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t stage) {
  return Rng(seed).fork(stage).next_u64();
}

constexpr std::uint64_t kStageData = 1;
constexpr std::uint64_t kStageNoise = 2;
constexpr std::uint64_t kStageSplit = 3;
constexpr std::uint64_t kStageDownstream = 4;

json selection_record(const ExperimentConfig& cfg, const std::string& fingerprint,
                      const SelectionReport& report) {
  json rec;
  rec["command"] = to_string(cfg.command);
  rec["fingerprint"] = fingerprint;
  rec["seed"] = report.seed;
  rec["model"] = to_string(report.kind);
  rec["topk"] = report.use_topk;
  rec["k"] = report.k;
  rec["selected"] = report.selected.indices;
  rec["degenerate_all_zero"] = report.degenerate_all_zero;
  rec["converged"] = report.converged;
  rec["iterations"] = report.iterations;
  return rec;
}

void append_metrics(json& rec, const MetricSet& metrics) {
  json m;
  for (const auto& [name, value] : metrics) m[name] = value;
  rec["metrics"] = std::move(m);
}

MetricSet downstream_metrics(const Dataset& train_part, const Dataset& test_part,
                             const SelectionReport& report, std::uint64_t seed) {
  MetricSet metrics;
  Dataset train_sel = select_columns(train_part, report.selected.indices);
  Dataset test_sel = select_columns(test_part, report.selected.indices);
  if (train_part.task == Task::regression) {
    OlsModel downstream = ols_fit(train_sel.X, train_sel.y);
    metrics = regression_metrics(test_sel.y, downstream.predict(test_sel.X));
  } else {
    ExtraTrees downstream = extra_trees_fit(train_sel.X, train_sel.y, 100, seed);
    metrics["accuracy"] = accuracy(test_sel.y, downstream.predict(test_sel.X));
  }
  if (train_part.informative) {
    SelectionScore score = f1_selection(report.selected, *train_part.informative);
    metrics["f1_selection"] = score.f1;
    metrics["precision"] = score.precision;
    metrics["recall"] = score.recall;
  }
  return metrics;
}

struct Writers {
  std::ofstream records;
  std::ofstream summary;
  std::ofstream curve;
  long record_count = 0;

  void record(const json& rec) {
    records << rec.dump() << "\n";
    record_count++;
  }
};

SparseTarget named_target(const std::string& name, int input_dim) {
  SparseTarget target;
  target.input_dim = input_dim;
  if (name == "const") {
    target.coords = {0};
    target.eta = 1.0;
    target.radius = 3.0;
    target.fn = [](const std::vector<double>&) { return 0.7; };
  } else if (name == "lin1") {
    target.coords = {3 % input_dim};
    target.eta = 3.0;
    target.radius = 3.0;
    target.fn = [](const std::vector<double>& x) { return x[0]; };
  } else if (name == "sin2") {
    target.coords = {2 % input_dim, 7 % input_dim};
    target.eta = 1.0;
    target.radius = 3.0;
    target.fn = [](const std::vector<double>& x) { return std::sin(x[0] + x[1]); };
  } else {
    throw ConfigError("unknown approx target '" + name + "'");
  }
  return target;
}

}  // namespace

Dataset build_dataset(const ExperimentConfig& cfg) {
  ExperimentConfig resolved = cfg;
  if (cfg.preset == "sim-paper") {
    // Reconstructed simulation preset, not a verbatim reproduction.
    resolved.n = 50;
    resolved.m = 100;
    resolved.informative = 25;
    resolved.task = "regression";
    resolved.split_ratio = 0.8;
  }

  Dataset d;
  if (resolved.source == "csv") {
    d = load_csv(resolved.csv_path, resolved.csv_target, task_from_string(resolved.task));
  } else {
    Task task = task_from_string(resolved.task);
    std::uint64_t data_seed = stage_seed(cfg.seed, kStageData);
    if (task == Task::regression) {
      d = make_sparse_regression(resolved.n, resolved.m, resolved.informative,
                                 resolved.noise_sd, data_seed);
    } else {
      d = make_sparse_classification(resolved.n, resolved.m, resolved.informative,
                                     resolved.classes, resolved.noise_sd, data_seed);
    }
  }
  if (cfg.inject_noise)
    d = inject_noise_features(d, stage_seed(cfg.seed, kStageNoise), cfg.noise_mean_scale,
                              cfg.noise_sd_scale);
  return d;
}

RunOutcome run(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::string fingerprint = experiment_fingerprint(cfg);

  RunOutcome outcome;
  outcome.run_dir = fs::path(cfg.out_dir) / (to_string(cfg.command) + "-" + fingerprint);
  if (fs::exists(outcome.run_dir)) {
    if (!cfg.overwrite)
      throw ConfigError("run directory '" + outcome.run_dir.string() +
                        "' already exists (pass overwrite to replace it)");
    fs::remove_all(outcome.run_dir);
  }
  fs::create_directories(outcome.run_dir);

  Writers w;
  w.records.open(outcome.run_dir / "records.jsonl");
  w.summary.open(outcome.run_dir / "summary.txt");
  bool wants_curve = cfg.command == Command::sweep_k || cfg.command == Command::stability ||
                     cfg.command == Command::approx_study;
  if (wants_curve) w.curve.open(outcome.run_dir / "curve.csv");

  w.summary << "command: " << to_string(cfg.command) << "\n";
  w.summary << "fingerprint: " << fingerprint << "\n";
  w.summary << "seed: " << cfg.seed << "\n";

  switch (cfg.command) {
    case Command::select:
    case Command::simulate: {
      Dataset d = build_dataset(cfg);
      auto [train_part, test_part] = split(d, cfg.split_ratio, stage_seed(cfg.seed, kStageSplit));
      if (cfg.standardize) standardize(train_part, test_part);

      SelectConfig sc = to_select_config(cfg);
      SelectionReport report = select(train_part, sc);
      MetricSet metrics = downstream_metrics(train_part, test_part, report,
                                             stage_seed(cfg.seed, kStageDownstream));

      json rec = selection_record(cfg, fingerprint, report);
      append_metrics(rec, metrics);
      w.record(rec);

      w.summary << "dataset: " << d.n() << " samples x " << d.m() << " features ("
                << to_string(d.task) << ")\n";
      w.summary << "model: " << cfg.model << (cfg.topk ? "+topk" : "") << ", k=" << report.k
                << "\n";
      w.summary << "selected:";
      for (int i : report.selected.indices) w.summary << " " << i;
      w.summary << "\n";
      if (report.degenerate_all_zero) w.summary << "flag: degenerate_all_zero\n";
      for (const auto& [name, value] : metrics)
        w.summary << name << " = " << value << "\n";
      break;
    }
    case Command::sweep_k: {
      Dataset d = build_dataset(cfg);
      SelectConfig sc = to_select_config(cfg);
      std::vector<SweepRow> rows = sweep_k(d, sc, cfg.k_values);

      std::vector<std::string> metric_names;
      for (const auto& [name, value] : rows.front().metrics) metric_names.push_back(name);
      w.curve << "k";
      for (const std::string& name : metric_names) w.curve << "," << name;
      w.curve << "\n";

      w.summary << "model: " << cfg.model << (cfg.topk ? "+topk" : "") << "\n";
      for (const SweepRow& row : rows) {
        json rec = selection_record(cfg, fingerprint, row.report);
        rec["k"] = row.k;
        append_metrics(rec, row.metrics);
        w.record(rec);

        w.curve << row.k;
        for (const std::string& name : metric_names) w.curve << "," << row.metrics.at(name);
        w.curve << "\n";
        w.summary << "k=" << row.k;
        for (const std::string& name : metric_names)
          w.summary << "  " << name << "=" << row.metrics.at(name);
        w.summary << "\n";
      }
      break;
    }
    case Command::stability: {
      Dataset d = build_dataset(cfg);
      SelectConfig sc = to_select_config(cfg);
      StabilityResult result = stability(d, sc, cfg.splits, cfg.stability_ratio);

      for (int i = 0; i < cfg.splits; ++i) {
        json rec = selection_record(cfg, fingerprint, result.reports[i]);
        rec["split"] = i;
        w.record(rec);
      }
      json aggregate;
      aggregate["command"] = to_string(cfg.command);
      aggregate["fingerprint"] = fingerprint;
      aggregate["seed"] = cfg.seed;
      aggregate["aggregate"] = true;
      aggregate["mean_jaccard"] = result.mean_jaccard;
      w.record(aggregate);

      w.curve << "i,j,jaccard\n";
      for (int i = 0; i < cfg.splits; ++i)
        for (int j = i + 1; j < cfg.splits; ++j)
          w.curve << i << "," << j << "," << result.jaccard(i, j) << "\n";

      w.summary << "model: " << cfg.model << (cfg.topk ? "+topk" : "") << "\n";
      w.summary << "splits: " << cfg.splits << " at ratio " << cfg.stability_ratio << "\n";
      w.summary << "mean_jaccard = " << result.mean_jaccard << "\n";
      break;
    }
    case Command::gradcheck: {
      GradCheckReport linear_report = gradcheck_linear(cfg.seed);
      GradCheckReport mlp_report = gradcheck_mlp(cfg.seed);
      for (const GradCheckReport* report : {&linear_report, &mlp_report}) {
        for (const GradCheckCase& c : report->cases) {
          json rec;
          rec["command"] = "gradcheck";
          rec["fingerprint"] = fingerprint;
          rec["seed"] = cfg.seed;
          rec["case"] = c.name;
          rec["rel_error"] = c.rel_error;
          rec["tolerance"] = c.tolerance;
          rec["pass"] = c.pass;
          w.record(rec);
        }
      }
      w.summary << "linear: max rel error " << linear_report.max_rel_error
                << (linear_report.pass ? " (pass)" : " (FAIL)") << "\n";
      w.summary << "mlp: max rel error " << mlp_report.max_rel_error
                << (mlp_report.pass ? " (pass)" : " (FAIL)") << "\n";
      outcome.check_failed = !(linear_report.pass && mlp_report.pass);
      break;
    }
    case Command::approx_study: {
      SparseTarget target = named_target(cfg.approx_target, 20);
      ApproxStudyConfig ac;
      ac.n_train = cfg.approx_n_train;
      ac.epochs = cfg.approx_epochs;
      ac.refine_epochs = cfg.approx_refine_epochs;
      ac.base_seed = cfg.seed;
      std::vector<ApproxRow> rows =
          approx_study(target, cfg.widths, cfg.approx_seeds, cfg.grid, ac);

      w.curve << "width,seed,sup_error\n";
      for (const ApproxRow& row : rows) {
        json rec;
        rec["command"] = "approx-study";
        rec["fingerprint"] = fingerprint;
        rec["seed"] = row.seed;
        rec["target"] = cfg.approx_target;
        rec["width"] = row.width;
        rec["sup_error"] = row.sup_error;
        w.record(rec);
        w.curve << row.width << "," << row.seed << "," << row.sup_error << "\n";
      }

      w.summary << "target: " << cfg.approx_target << "\n";
      for (int width : cfg.widths) {
        std::vector<double> errors;
        for (const ApproxRow& row : rows)
          if (row.width == width) errors.push_back(row.sup_error);
        std::sort(errors.begin(), errors.end());
        w.summary << "width " << width << ": median sup_error "
                  << errors[errors.size() / 2] << "\n";
      }
      break;
    }
  }

  outcome.record_count = w.record_count;
  return outcome;
}

}  // namespace topkfs
