#include "topkfs/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace topkfs {

namespace {

constexpr double kSdFloor = 1e-12;

std::vector<int> sample_subset(Rng& rng, long m, int count) {
  std::vector<int> all(m);
  std::iota(all.begin(), all.end(), 0);
  // Partial Fisher-Yates: the first `count` entries are a uniform subset.
  for (int i = 0; i < count; ++i) {
    long j = i + static_cast<long>(rng.uniform_index(m - i));
    std::swap(all[i], all[j]);
  }
  std::vector<int> subset(all.begin(), all.begin() + count);
  std::sort(subset.begin(), subset.end());
  return subset;
}

std::vector<std::string> default_names(long m) {
  std::vector<std::string> names(m);
  for (long j = 0; j < m; ++j) names[j] = "f" + std::to_string(j);
  return names;
}

double coefficient(Rng& rng) {
  double c = rng.uniform(1.0, 10.0);
  return rng.uniform() < 0.5 ? -c : c;
}

}  // namespace

void Dataset::validate() const {
  if (X.rows() < 1 || X.cols() < 1) throw ConfigError("dataset must be non-empty");
  if (y.size() != X.rows()) throw ConfigError("dataset: |y| != rows of X");
  if (!all_finite(X) || !all_finite(y)) throw ConfigError("dataset contains non-finite values");
  if (task != Task::regression) {
    for (long i = 0; i < y.size(); ++i) {
      double label = y[i];
      if (label != std::floor(label) || label < 0 || label >= n_classes)
        throw ConfigError("class index out of range at row " + std::to_string(i));
    }
  }
  if (informative) {
    for (int j : *informative)
      if (j < 0 || j >= X.cols()) throw ConfigError("informative index out of range");
  }
}

Dataset make_sparse_regression(long n, long m, int n_informative, double noise_sd,
                               std::uint64_t seed) {
  if (n < 1 || m < 1) throw ConfigError("make_sparse_regression: n and m must be >= 1");
  if (n_informative < 0 || n_informative > m)
    throw ConfigError("make_sparse_regression: need 0 <= n_informative <= m");
  if (noise_sd < 0) throw ConfigError("make_sparse_regression: noise_sd must be >= 0");

  Rng rng(seed);
  Dataset d;
  d.task = Task::regression;
  d.X.resize(n, m);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < m; ++j) d.X(i, j) = rng.normal();

  std::vector<int> info = sample_subset(rng, m, n_informative);
  Vector w_true = Vector::Zero(m);
  for (int j : info) w_true[j] = coefficient(rng);

  d.y = d.X * w_true;
  if (noise_sd > 0)
    for (long i = 0; i < n; ++i) d.y[i] += rng.normal(0.0, noise_sd);

  d.feature_names = default_names(m);
  d.informative = std::move(info);
  return d;
}

Dataset make_sparse_classification(long n, long m, int n_informative, int n_classes,
                                   double noise_sd, std::uint64_t seed) {
  if (n < 1 || m < 1) throw ConfigError("make_sparse_classification: n and m must be >= 1");
  if (n_informative < 1 || n_informative > m)
    throw ConfigError("make_sparse_classification: need 1 <= n_informative <= m");
  if (n_classes < 2) throw ConfigError("make_sparse_classification: need >= 2 classes");

  Rng rng(seed);
  Dataset d;
  d.task = n_classes == 2 ? Task::binary : Task::multiclass;
  d.n_classes = n_classes;
  d.X.resize(n, m);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < m; ++j) d.X(i, j) = rng.normal();

  std::vector<int> info = sample_subset(rng, m, n_informative);
  Matrix class_w = Matrix::Zero(m, n_classes);
  for (int c = 0; c < n_classes; ++c)
    for (int j : info) class_w(j, c) = coefficient(rng);

  d.y.resize(n);
  for (long i = 0; i < n; ++i) {
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < n_classes; ++c) {
      double score = d.X.row(i) * class_w.col(c);
      if (noise_sd > 0) score += rng.normal(0.0, noise_sd);
      if (score > best_score) {
        best_score = score;
        best = c;
      }
    }
    d.y[i] = best;
  }

  d.feature_names = default_names(m);
  d.informative = std::move(info);
  return d;
}

Dataset inject_noise_features(const Dataset& d, std::uint64_t seed, double mean_scale,
                              double sd_scale) {
  d.validate();
  if (sd_scale < 0) throw ConfigError("inject_noise_features: sd_scale must be >= 0");
  const long n = d.n(), m = d.m();
  Rng rng(seed);

  long subset_size = std::min<long>(20, n);
  if (n < 20) warn("inject_noise_features: n < 20, using all samples for the statistics");
  std::vector<int> rows = sample_subset(rng, n, static_cast<int>(subset_size));

  Dataset out;
  out.task = d.task;
  out.n_classes = d.n_classes;
  out.y = d.y;
  out.X.resize(n, 2 * m);
  out.X.leftCols(m) = d.X;

  for (long j = 0; j < m; ++j) {
    double mean = 0.0;
    for (int r : rows) mean += d.X(r, j);
    mean /= static_cast<double>(subset_size);
    double var = 0.0;
    for (int r : rows) {
      double diff = d.X(r, j) - mean;
      var += diff * diff;
    }
    var /= static_cast<double>(subset_size);
    double sd = std::max(std::sqrt(var), kSdFloor);

    double noise_mean = mean_scale * mean;
    double noise_sd = sd_scale * sd;
    for (long i = 0; i < n; ++i) out.X(i, m + j) = rng.normal(noise_mean, noise_sd);
  }

  out.feature_names = d.feature_names.empty() ? default_names(m) : d.feature_names;
  out.feature_names.reserve(2 * m);
  for (long j = 0; j < m; ++j) out.feature_names.push_back(out.feature_names[j] + "_noise");

  std::vector<int> info(m);
  std::iota(info.begin(), info.end(), 0);
  out.informative = std::move(info);
  return out;
}

namespace {

double parse_cell(const std::string& cell, long row, long col) {
  double value;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("CSV parse error at row " + std::to_string(row) + ", column " +
                      std::to_string(col) + ": '" + cell + "' is not numeric");
  return value;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& target_column, Task task) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open CSV file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw ConfigError("CSV file '" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_line(line);
  const long n_cols = static_cast<long>(header.size());
  if (n_cols < 2) throw ConfigError("CSV needs at least one feature column and a target");

  long target_idx = -1;
  for (long j = 0; j < n_cols; ++j)
    if (header[j] == target_column) target_idx = j;
  if (target_idx < 0) {
    // Fall back to a numeric column index.
    try {
      size_t used = 0;
      long idx = std::stol(target_column, &used);
      if (used == target_column.size() && idx >= 0 && idx < n_cols) target_idx = idx;
    } catch (const std::exception&) {
    }
  }
  if (target_idx < 0)
    throw ConfigError("target column '" + target_column + "' not found in CSV header");

  std::vector<std::vector<double>> rows;
  long row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (static_cast<long>(cells.size()) != n_cols)
      throw ConfigError("CSV row " + std::to_string(row_no) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(n_cols));
    std::vector<double> values(n_cols);
    for (long j = 0; j < n_cols; ++j) {
      if (cells[j].empty())
        throw ConfigError("CSV missing value at row " + std::to_string(row_no) +
                          ", column " + std::to_string(j));
      values[j] = parse_cell(cells[j], row_no, j);
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ConfigError("CSV file '" + path + "' has no data rows");

  const long n = static_cast<long>(rows.size());
  const long m = n_cols - 1;
  Dataset d;
  d.task = task;
  d.X.resize(n, m);
  d.y.resize(n);
  for (long i = 0; i < n; ++i) {
    long col = 0;
    for (long j = 0; j < n_cols; ++j) {
      if (j == target_idx)
        d.y[i] = rows[i][j];
      else
        d.X(i, col++) = rows[i][j];
    }
  }
  for (long j = 0; j < n_cols; ++j)
    if (j != target_idx) d.feature_names.push_back(header[j]);

  if (task != Task::regression) {
    std::map<double, int> classes;
    for (long i = 0; i < n; ++i) {
      if (d.y[i] != std::floor(d.y[i]))
        throw ConfigError("classification label at row " + std::to_string(i + 2) +
                          " is not integral");
      classes.emplace(d.y[i], 0);
    }
    int next = 0;
    for (auto& [value, idx] : classes) idx = next++;
    for (long i = 0; i < n; ++i) d.y[i] = classes.at(d.y[i]);
    d.n_classes = next;
    if (task == Task::binary && d.n_classes != 2)
      throw ConfigError("binary task requires exactly 2 distinct labels, found " +
                        std::to_string(d.n_classes));
  }

  d.validate();
  return d;
}

void save_csv(const Dataset& d, const std::string& path, const std::string& target_name) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write CSV file '" + path + "'");
  const long n = d.n(), m = d.m();
  std::vector<std::string> names = d.feature_names.empty() ? default_names(m) : d.feature_names;

  for (long j = 0; j < m; ++j) out << names[j] << ",";
  out << target_name << "\n";

  auto write_value = [&](double v) { out << double_to_string(v); };
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < m; ++j) {
      write_value(d.X(i, j));
      out << ",";
    }
    write_value(d.y[i]);
    out << "\n";
  }
}

std::pair<Dataset, Dataset> split(const Dataset& d, double train_ratio, std::uint64_t seed) {
  d.validate();
  const long n = d.n();
  long n_train = std::lround(train_ratio * static_cast<double>(n));
  if (n_train < 1 || n_train >= n)
    throw ConfigError("split: ratio " + std::to_string(train_ratio) + " leaves an empty part (n=" +
                      std::to_string(n) + ")");

  std::vector<long> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.shuffle(perm.data(), perm.size());

  auto take = [&](long begin, long count) {
    Dataset part;
    part.task = d.task;
    part.n_classes = d.n_classes;
    part.feature_names = d.feature_names;
    part.informative = d.informative;
    part.X.resize(count, d.m());
    part.y.resize(count);
    for (long i = 0; i < count; ++i) {
      part.X.row(i) = d.X.row(perm[begin + i]);
      part.y[i] = d.y[perm[begin + i]];
    }
    return part;
  };
  return {take(0, n_train), take(n_train, n - n_train)};
}

void StandardizeTransform::apply(Dataset& d) const {
  if (d.m() != feature_mean.size()) throw ConfigError("standardize: feature count mismatch");
  d.X.rowwise() -= feature_mean.transpose();
  d.X.array().rowwise() /= feature_sd.transpose().array();
  if (targets_centered) d.y.array() -= target_mean;
}

StandardizeTransform standardize(Dataset& train, Dataset& test, bool center_targets) {
  StandardizeTransform t = standardize(train, center_targets);
  t.apply(test);
  return t;
}

StandardizeTransform standardize(Dataset& train, bool center_targets) {
  const long n = train.n(), m = train.m();
  StandardizeTransform t;
  t.feature_mean = train.X.colwise().mean();
  t.feature_sd.resize(m);
  for (long j = 0; j < m; ++j) {
    double var = (train.X.col(j).array() - t.feature_mean[j]).square().sum() /
                 static_cast<double>(n);
    double sd = std::sqrt(var);
    if (sd < kSdFloor) {
      warn("standardize: near-constant column " + std::to_string(j) + ", sd floored");
      sd = kSdFloor;
    }
    t.feature_sd[j] = sd;
  }
  if (train.task == Task::regression && center_targets) {
    t.target_mean = train.y.mean();
    t.targets_centered = true;
  }
  t.apply(train);
  return t;
}

Dataset select_columns(const Dataset& d, const std::vector<int>& columns) {
  Dataset out;
  out.task = d.task;
  out.n_classes = d.n_classes;
  out.y = d.y;
  out.X.resize(d.n(), static_cast<long>(columns.size()));
  for (size_t c = 0; c < columns.size(); ++c) {
    int j = columns[c];
    if (j < 0 || j >= d.m()) throw ConfigError("select_columns: index out of range");
    out.X.col(static_cast<long>(c)) = d.X.col(j);
    if (!d.feature_names.empty()) out.feature_names.push_back(d.feature_names[j]);
  }
  return out;
}

}  // namespace topkfs
