#pragma once

#include <filesystem>

#include "topkfs/config.hpp"

namespace topkfs {

struct RunOutcome {
  std::filesystem::path run_dir;
  long record_count = 0;
  bool check_failed = false;  // gradcheck tolerance exceeded
};

// Executes the configured command and writes, under
// out_dir/<command>-<fingerprint>/:
//   records.jsonl  one self-describing record per run, stable field order
//   summary.txt    human-readable table
//   curve.csv      plot-ready rows (sweep-k, stability, approx-study)
// All file contents are deterministic functions of (config, seed); an
// existing run directory is an error unless overwrite is set. Throws
// ConfigError on bad input and NumericalError on solver failure.
RunOutcome run(const ExperimentConfig& cfg);

// Builds the configured dataset (synthetic or CSV, preset applied, noise
// injection included). Exposed for tests and tooling.
Dataset build_dataset(const ExperimentConfig& cfg);

}  // namespace topkfs
