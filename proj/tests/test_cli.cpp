#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "topkfs/experiment.hpp"

using namespace topkfs;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ExperimentConfig small_select_config() {
  ExperimentConfig cfg = default_config();
  cfg.command = Command::select;
  cfg.n = 80;
  cfg.m = 20;
  cfg.informative = 5;
  cfg.hyper.k = 5;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("config serialization round-trips to an identical fingerprint") {
  ExperimentConfig cfg = default_config();
  cfg.command = Command::sweep_k;
  cfg.hyper.lambda_topk = 2.5;
  cfg.k_values = {3, 6, 9};
  cfg.hidden = {10, 5};

  ExperimentConfig parsed;  // different starting point on purpose
  parsed.hyper.k = 99;
  parse_config_text(serialize_config(cfg), parsed);
  CHECK(serialize_config(parsed) == serialize_config(cfg));
  CHECK(experiment_fingerprint(parsed) == experiment_fingerprint(cfg));
}

TEST_CASE("unknown config keys are a hard error that names them") {
  ExperimentConfig cfg = default_config();
  std::string text = "[hyper]\nk = 3\nshrinkage = 0.5\n[mystery]\nfoo = 1\n";
  CHECK_THROWS_WITH_AS(parse_config_text(text, cfg),
                       doctest::Contains("hyper.shrinkage"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[mystery]\nfoo = 1\n", cfg),
                       doctest::Contains("mystery.foo"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[hyper]\nk = banana\n", cfg), ConfigError);
}

TEST_CASE("overrides use the section.key=value form") {
  ExperimentConfig cfg = default_config();
  apply_override("hyper.k=17", cfg);
  CHECK(cfg.hyper.k == 17);
  apply_override("train.hidden=4,2", cfg);
  CHECK(cfg.hidden == std::vector<int>{4, 2});
  CHECK_THROWS_AS(apply_override("nonsense", cfg), ConfigError);
  CHECK_THROWS_AS(apply_override("hyper.bogus=1", cfg), ConfigError);
}

TEST_CASE("fingerprint ignores seed and output location") {
  ExperimentConfig a = small_select_config();
  ExperimentConfig b = a;
  b.seed = 12345;
  b.out_dir = "elsewhere";
  b.overwrite = true;
  CHECK(experiment_fingerprint(a) == experiment_fingerprint(b));

  b.hyper.k = 6;
  CHECK(experiment_fingerprint(a) != experiment_fingerprint(b));
}

TEST_CASE("select run writes records, summary, and respects overwrite") {
  TempDir tmp("topkfs_run_select");
  ExperimentConfig cfg = small_select_config();
  cfg.out_dir = tmp.path.string();

  RunOutcome outcome = run(cfg);
  CHECK(outcome.record_count == 1);
  CHECK(fs::exists(outcome.run_dir / "records.jsonl"));
  CHECK(fs::exists(outcome.run_dir / "summary.txt"));

  std::string record = read_file(outcome.run_dir / "records.jsonl");
  CHECK(record.find("\"fingerprint\"") != std::string::npos);
  CHECK(record.find("\"selected\"") != std::string::npos);
  CHECK(record.find("\"f1_selection\"") != std::string::npos);

  // A second run into the same directory requires the overwrite flag.
  CHECK_THROWS_AS(run(cfg), ConfigError);
  cfg.overwrite = true;
  CHECK(run(cfg).record_count == 1);
}

TEST_CASE("simulate with the sim-paper preset yields one record") {
  TempDir tmp("topkfs_run_sim");
  ExperimentConfig cfg = default_config();
  cfg.command = Command::simulate;
  cfg.preset = "sim-paper";
  cfg.hyper.k = 25;
  cfg.out_dir = tmp.path.string();
  RunOutcome outcome = run(cfg);
  CHECK(outcome.record_count == 1);
  std::string summary = read_file(outcome.run_dir / "summary.txt");
  CHECK(summary.find("50 samples x 100 features") != std::string::npos);
}

TEST_CASE("sweep-k over five k values yields five records and a curve") {
  TempDir tmp("topkfs_run_sweep");
  ExperimentConfig cfg = default_config();
  cfg.command = Command::sweep_k;
  cfg.n = 120;
  cfg.m = 60;
  cfg.informative = 20;
  cfg.k_values = {10, 20, 30, 40, 50};
  cfg.out_dir = tmp.path.string();

  RunOutcome outcome = run(cfg);
  CHECK(outcome.record_count == 5);
  std::string curve = read_file(outcome.run_dir / "curve.csv");
  CHECK(std::count(curve.begin(), curve.end(), '\n') == 6);  // header + 5 rows
  CHECK(curve.rfind("k,", 0) == 0);
}

TEST_CASE("identical config and seed produce byte-identical result files") {
  TempDir tmp_a("topkfs_det_a");
  TempDir tmp_b("topkfs_det_b");

  for (Command command : {Command::select, Command::sweep_k}) {
    ExperimentConfig cfg = small_select_config();
    cfg.command = command;
    cfg.k_values = {2, 4};

    cfg.out_dir = tmp_a.path.string();
    RunOutcome a = run(cfg);
    cfg.out_dir = tmp_b.path.string();
    RunOutcome b = run(cfg);

    CHECK(read_file(a.run_dir / "records.jsonl") == read_file(b.run_dir / "records.jsonl"));
    CHECK(read_file(a.run_dir / "summary.txt") == read_file(b.run_dir / "summary.txt"));
    if (command == Command::sweep_k)
      CHECK(read_file(a.run_dir / "curve.csv") == read_file(b.run_dir / "curve.csv"));
  }
}

TEST_CASE("gradcheck command reports per-case lines and passes") {
  TempDir tmp("topkfs_run_gradcheck");
  ExperimentConfig cfg = default_config();
  cfg.command = Command::gradcheck;
  cfg.out_dir = tmp.path.string();
  RunOutcome outcome = run(cfg);
  CHECK_FALSE(outcome.check_failed);
  CHECK(outcome.record_count > 10);
  std::string summary = read_file(outcome.run_dir / "summary.txt");
  CHECK(summary.find("linear: max rel error") != std::string::npos);
  CHECK(summary.find("(pass)") != std::string::npos);
}

TEST_CASE("config validation catches unusable setups") {
  ExperimentConfig cfg = default_config();
  cfg.source = "csv";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = default_config();
  cfg.command = Command::sweep_k;
  cfg.k_values = {};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = default_config();
  cfg.split_ratio = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = default_config();
  cfg.approx_target = "cube";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
