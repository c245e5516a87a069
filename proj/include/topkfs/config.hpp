#pragma once

#include "topkfs/selection.hpp"

namespace topkfs {

enum class Command { select, sweep_k, stability, simulate, gradcheck, approx_study };

std::string to_string(Command c);
Command command_from_string(const std::string& s);

// Flat key-value config with one section per module. Every key has a
// default; parsing rejects unknown sections or keys, listing them.
struct ExperimentConfig {
  Command command = Command::select;

  // [experiment]
  std::uint64_t seed = 42;
  std::string out_dir = "runs";
  bool overwrite = false;

  // [data]
  std::string source = "synthetic";  // synthetic | csv
  std::string preset = "none";       // none | sim-paper (n=50, m=100, 25 informative)
  long n = 200;
  long m = 100;
  int informative = 25;
  double noise_sd = 1.0;
  std::string task = "regression";
  int classes = 2;
  std::string csv_path;
  std::string csv_target;
  bool inject_noise = false;
  double noise_mean_scale = 0.1;  // injection protocol scales
  double noise_sd_scale = 0.01;
  double split_ratio = 0.8;
  bool standardize = true;

  // [model]
  std::string model = "enet";
  bool topk = true;

  // [hyper]
  Hyperparams hyper;

  // [train]
  long epochs = 200;
  long batch_size = 0;
  std::string optimizer = "adam";
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  std::vector<int> hidden = {64, 32};
  double hidden_decay = 0.0;

  // [sweep]
  std::vector<int> k_values = {10, 20, 30, 40, 50};

  // [stability]
  int splits = 10;
  double stability_ratio = 0.8;

  // [approx]
  std::string approx_target = "sin2";  // const | lin1 | sin2
  std::vector<int> widths = {16, 64, 256};
  int approx_seeds = 5;
  int grid = 32;
  long approx_n_train = 2000;
  long approx_epochs = 400;
  long approx_refine_epochs = 400;

  void validate() const;
};

// Defaults tuned so `simulate` and `select` behave sensibly out of the box.
ExperimentConfig default_config();

// Canonical text form; parse(serialize(cfg)) reproduces cfg exactly.
std::string serialize_config(const ExperimentConfig& cfg);

// Parses canonical text into cfg (on top of current values). Unknown
// sections/keys or malformed values raise ConfigError.
void parse_config_text(const std::string& text, ExperimentConfig& cfg);
void parse_config_file(const std::string& path, ExperimentConfig& cfg);

// "section.key=value" override, same key set as the file format.
void apply_override(const std::string& assignment, ExperimentConfig& cfg);

// Hash of all settings except the seed, as a 16-hex-digit string.
std::string experiment_fingerprint(const ExperimentConfig& cfg);

SelectConfig to_select_config(const ExperimentConfig& cfg);

}  // namespace topkfs
