#include "topkfs/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace topkfs {

std::string to_string(Command c) {
  switch (c) {
    case Command::select: return "select";
    case Command::sweep_k: return "sweep-k";
    case Command::stability: return "stability";
    case Command::simulate: return "simulate";
    case Command::gradcheck: return "gradcheck";
    case Command::approx_study: return "approx-study";
  }
  return "select";
}

Command command_from_string(const std::string& s) {
  if (s == "select") return Command::select;
  if (s == "sweep-k") return Command::sweep_k;
  if (s == "stability") return Command::stability;
  if (s == "simulate") return Command::simulate;
  if (s == "gradcheck") return Command::gradcheck;
  if (s == "approx-study") return Command::approx_study;
  throw ConfigError("unknown command: '" + s + "'");
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.hyper.k = 10;
  cfg.hyper.lambda_topk = 1.0;
  cfg.hyper.lambda_l1 = 0.1;
  cfg.hyper.lambda_l2 = 0.01;
  return cfg;
}

void ExperimentConfig::validate() const {
  hyper.validate();
  if (source != "synthetic" && source != "csv")
    throw ConfigError("data.source must be 'synthetic' or 'csv'");
  if (preset != "none" && preset != "sim-paper")
    throw ConfigError("data.preset must be 'none' or 'sim-paper'");
  if (source == "csv") {
    if (csv_path.empty()) throw ConfigError("data.csv_path is required for csv source");
    if (csv_target.empty()) throw ConfigError("data.target is required for csv source");
  } else {
    if (n < 1 || m < 1) throw ConfigError("data.n and data.m must be >= 1");
    if (informative < 0 || informative > m)
      throw ConfigError("data.informative must be in [0, m]");
  }
  task_from_string(task);
  model_kind_from_string(model);
  if (split_ratio <= 0.0 || split_ratio >= 1.0)
    throw ConfigError("data.split_ratio must be in (0, 1)");
  if (optimizer != "adam" && optimizer != "sgd")
    throw ConfigError("train.optimizer must be 'adam' or 'sgd'");
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  for (int width : hidden)
    if (width < 1) throw ConfigError("train.hidden widths must be >= 1");
  if (command == Command::sweep_k && k_values.empty())
    throw ConfigError("sweep.k_values must not be empty");
  for (int k : k_values)
    if (k < 1) throw ConfigError("sweep.k_values entries must be >= 1");
  if (splits < 2) throw ConfigError("stability.splits must be >= 2");
  if (stability_ratio <= 0.0 || stability_ratio >= 1.0)
    throw ConfigError("stability.ratio must be in (0, 1)");
  if (approx_target != "const" && approx_target != "lin1" && approx_target != "sin2")
    throw ConfigError("approx.target must be one of: const, lin1, sin2");
  if (widths.empty()) throw ConfigError("approx.widths must not be empty");
  if (approx_seeds < 1) throw ConfigError("approx.seeds must be >= 1");
  if (grid < 2) throw ConfigError("approx.grid must be >= 2");
}

namespace {

std::string format_double(double v) { return double_to_string(v); }

std::string format_bool(bool b) { return b ? "true" : "false"; }

std::string format_list(const std::vector<int>& values) {
  std::string s;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(values[i]);
  }
  return s;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + value + "'");
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    long v = std::stol(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    unsigned long long v = std::stoull(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "': expected an unsigned integer, got '" + value + "'");
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  if (value.empty()) return out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(static_cast<int>(parse_long(key, item)));
  return out;
}

std::string trim(const std::string& s) {
  size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

// Returns true when the key belongs to the section and was applied.
bool apply_key(ExperimentConfig& cfg, const std::string& section, const std::string& key,
               const std::string& value) {
  const std::string full = section + "." + key;
  if (section == "experiment") {
    if (key == "command") { cfg.command = command_from_string(value); return true; }
    if (key == "seed") { cfg.seed = parse_u64(full, value); return true; }
    if (key == "out_dir") { cfg.out_dir = value; return true; }
    if (key == "overwrite") { cfg.overwrite = parse_bool(full, value); return true; }
    return false;
  }
  if (section == "data") {
    if (key == "source") { cfg.source = value; return true; }
    if (key == "preset") { cfg.preset = value; return true; }
    if (key == "n") { cfg.n = parse_long(full, value); return true; }
    if (key == "m") { cfg.m = parse_long(full, value); return true; }
    if (key == "informative") { cfg.informative = static_cast<int>(parse_long(full, value)); return true; }
    if (key == "noise_sd") { cfg.noise_sd = parse_double(full, value); return true; }
    if (key == "task") { cfg.task = value; return true; }
    if (key == "classes") { cfg.classes = static_cast<int>(parse_long(full, value)); return true; }
    if (key == "csv_path") { cfg.csv_path = value; return true; }
    if (key == "target") { cfg.csv_target = value; return true; }
    if (key == "inject_noise") { cfg.inject_noise = parse_bool(full, value); return true; }
    if (key == "noise_mean_scale") { cfg.noise_mean_scale = parse_double(full, value); return true; }
    if (key == "noise_sd_scale") { cfg.noise_sd_scale = parse_double(full, value); return true; }
    if (key == "split_ratio") { cfg.split_ratio = parse_double(full, value); return true; }
    if (key == "standardize") { cfg.standardize = parse_bool(full, value); return true; }
    return false;
  }
  if (section == "model") {
    if (key == "kind") { cfg.model = value; return true; }
    if (key == "topk") { cfg.topk = parse_bool(full, value); return true; }
    return false;
  }
  if (section == "hyper") {
    if (key == "lambda_l2") { cfg.hyper.lambda_l2 = parse_double(full, value); return true; }
    if (key == "lambda_l1") { cfg.hyper.lambda_l1 = parse_double(full, value); return true; }
    if (key == "lambda_topk") { cfg.hyper.lambda_topk = parse_double(full, value); return true; }
    if (key == "k") { cfg.hyper.k = static_cast<int>(parse_long(full, value)); return true; }
    if (key == "max_iters") { cfg.hyper.max_iters = parse_long(full, value); return true; }
    if (key == "tol") { cfg.hyper.tol = parse_double(full, value); return true; }
    if (key == "step") { cfg.hyper.step = parse_double(full, value); return true; }
    if (key == "backtracking") { cfg.hyper.backtracking = parse_bool(full, value); return true; }
    if (key == "l2_squared") { cfg.hyper.l2_squared = parse_bool(full, value); return true; }
    return false;
  }
  if (section == "train") {
    if (key == "epochs") { cfg.epochs = parse_long(full, value); return true; }
    if (key == "batch_size") { cfg.batch_size = parse_long(full, value); return true; }
    if (key == "optimizer") { cfg.optimizer = value; return true; }
    if (key == "learning_rate") { cfg.learning_rate = parse_double(full, value); return true; }
    if (key == "beta1") { cfg.beta1 = parse_double(full, value); return true; }
    if (key == "beta2") { cfg.beta2 = parse_double(full, value); return true; }
    if (key == "hidden") { cfg.hidden = parse_int_list(full, value); return true; }
    if (key == "hidden_decay") { cfg.hidden_decay = parse_double(full, value); return true; }
    return false;
  }
  if (section == "sweep") {
    if (key == "k_values") { cfg.k_values = parse_int_list(full, value); return true; }
    return false;
  }
  if (section == "stability") {
    if (key == "splits") { cfg.splits = static_cast<int>(parse_long(full, value)); return true; }
    if (key == "ratio") { cfg.stability_ratio = parse_double(full, value); return true; }
    return false;
  }
  if (section == "approx") {
    if (key == "target") { cfg.approx_target = value; return true; }
    if (key == "widths") { cfg.widths = parse_int_list(full, value); return true; }
    if (key == "seeds") { cfg.approx_seeds = static_cast<int>(parse_long(full, value)); return true; }
    if (key == "grid") { cfg.grid = static_cast<int>(parse_long(full, value)); return true; }
    if (key == "n_train") { cfg.approx_n_train = parse_long(full, value); return true; }
    if (key == "epochs") { cfg.approx_epochs = parse_long(full, value); return true; }
    if (key == "refine_epochs") { cfg.approx_refine_epochs = parse_long(full, value); return true; }
    return false;
  }
  throw ConfigError("unknown config section: [" + section + "]");
}

}  // namespace

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[experiment]\n";
  out << "command = " << to_string(cfg.command) << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "out_dir = " << cfg.out_dir << "\n";
  out << "overwrite = " << format_bool(cfg.overwrite) << "\n";
  out << "\n[data]\n";
  out << "source = " << cfg.source << "\n";
  out << "preset = " << cfg.preset << "\n";
  out << "n = " << cfg.n << "\n";
  out << "m = " << cfg.m << "\n";
  out << "informative = " << cfg.informative << "\n";
  out << "noise_sd = " << format_double(cfg.noise_sd) << "\n";
  out << "task = " << cfg.task << "\n";
  out << "classes = " << cfg.classes << "\n";
  out << "csv_path = " << cfg.csv_path << "\n";
  out << "target = " << cfg.csv_target << "\n";
  out << "inject_noise = " << format_bool(cfg.inject_noise) << "\n";
  out << "noise_mean_scale = " << format_double(cfg.noise_mean_scale) << "\n";
  out << "noise_sd_scale = " << format_double(cfg.noise_sd_scale) << "\n";
  out << "split_ratio = " << format_double(cfg.split_ratio) << "\n";
  out << "standardize = " << format_bool(cfg.standardize) << "\n";
  out << "\n[model]\n";
  out << "kind = " << cfg.model << "\n";
  out << "topk = " << format_bool(cfg.topk) << "\n";
  out << "\n[hyper]\n";
  out << "lambda_l2 = " << format_double(cfg.hyper.lambda_l2) << "\n";
  out << "lambda_l1 = " << format_double(cfg.hyper.lambda_l1) << "\n";
  out << "lambda_topk = " << format_double(cfg.hyper.lambda_topk) << "\n";
  out << "k = " << cfg.hyper.k << "\n";
  out << "max_iters = " << cfg.hyper.max_iters << "\n";
  out << "tol = " << format_double(cfg.hyper.tol) << "\n";
  out << "step = " << format_double(cfg.hyper.step) << "\n";
  out << "backtracking = " << format_bool(cfg.hyper.backtracking) << "\n";
  out << "l2_squared = " << format_bool(cfg.hyper.l2_squared) << "\n";
  out << "\n[train]\n";
  out << "epochs = " << cfg.epochs << "\n";
  out << "batch_size = " << cfg.batch_size << "\n";
  out << "optimizer = " << cfg.optimizer << "\n";
  out << "learning_rate = " << format_double(cfg.learning_rate) << "\n";
  out << "beta1 = " << format_double(cfg.beta1) << "\n";
  out << "beta2 = " << format_double(cfg.beta2) << "\n";
  out << "hidden = " << format_list(cfg.hidden) << "\n";
  out << "hidden_decay = " << format_double(cfg.hidden_decay) << "\n";
  out << "\n[sweep]\n";
  out << "k_values = " << format_list(cfg.k_values) << "\n";
  out << "\n[stability]\n";
  out << "splits = " << cfg.splits << "\n";
  out << "ratio = " << format_double(cfg.stability_ratio) << "\n";
  out << "\n[approx]\n";
  out << "target = " << cfg.approx_target << "\n";
  out << "widths = " << format_list(cfg.widths) << "\n";
  out << "seeds = " << cfg.approx_seeds << "\n";
  out << "grid = " << cfg.grid << "\n";
  out << "n_train = " << cfg.approx_n_train << "\n";
  out << "epochs = " << cfg.approx_epochs << "\n";
  out << "refine_epochs = " << cfg.approx_refine_epochs << "\n";
  return out.str();
}

void parse_config_text(const std::string& text, ExperimentConfig& cfg) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::vector<std::string> unknown;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("malformed section header at line " + std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value' at line " + std::to_string(line_no));
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError("key '" + key + "' appears before any [section]");
    try {
      if (!apply_key(cfg, section, key, value)) unknown.push_back(section + "." + key);
    } catch (const ConfigError& e) {
      if (std::string(e.what()).rfind("unknown config section", 0) == 0) {
        unknown.push_back(section + "." + key);
      } else {
        throw;
      }
    }
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const std::string& key : unknown) msg += " " + key;
    throw ConfigError(msg);
  }
}

void parse_config_file(const std::string& path, ExperimentConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  parse_config_text(buffer.str(), cfg);
}

void apply_override(const std::string& assignment, ExperimentConfig& cfg) {
  size_t eq = assignment.find('=');
  size_t dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw ConfigError("override must look like section.key=value, got '" + assignment + "'");
  std::string section = trim(assignment.substr(0, dot));
  std::string key = trim(assignment.substr(dot + 1, eq - dot - 1));
  std::string value = trim(assignment.substr(eq + 1));
  if (!apply_key(cfg, section, key, value))
    throw ConfigError("unknown config keys: " + section + "." + key);
}

std::string experiment_fingerprint(const ExperimentConfig& cfg) {
  ExperimentConfig canonical = cfg;
  // The seed is reported alongside each record; the output location and
  // overwrite flag do not change what the experiment computes.
  canonical.seed = 0;
  canonical.out_dir = "";
  canonical.overwrite = false;
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(serialize_config(canonical))));
  return buf;
}

SelectConfig to_select_config(const ExperimentConfig& cfg) {
  SelectConfig sc;
  sc.kind = model_kind_from_string(cfg.model);
  sc.use_topk = cfg.topk;
  sc.standardize = cfg.standardize;
  sc.split_ratio = cfg.split_ratio;
  sc.train.hyper = cfg.hyper;
  sc.train.epochs = cfg.epochs;
  sc.train.batch_size = cfg.batch_size;
  sc.train.optimizer = cfg.optimizer == "sgd" ? Optimizer::sgd : Optimizer::adam;
  sc.train.learning_rate = cfg.learning_rate;
  sc.train.beta1 = cfg.beta1;
  sc.train.beta2 = cfg.beta2;
  sc.train.hidden_widths = cfg.hidden;
  sc.train.hidden_decay = cfg.hidden_decay;
  sc.train.seed = cfg.seed;
  return sc;
}

}  // namespace topkfs
