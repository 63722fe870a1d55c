/*
 * Copyright 2026 The HTE Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hte/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <sstream>

#include "hte/error.hpp"
#include "hte/rng.hpp"

namespace hte {

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(rows[k]);
    out.x.row(static_cast<Eigen::Index>(k)) = x.row(r);
    out.y[static_cast<Eigen::Index>(k)] = y[r];
  }
  out.feature_names = feature_names;
  out.target_name = target_name;
  return out;
}

void validate(const Dataset& d) {
  if (d.x.rows() != d.y.size()) throw DataError("feature and target row counts differ");
  if (d.x.rows() < 1) throw DataError("dataset is empty");
  if (!d.x.allFinite() || !d.y.allFinite()) throw DataError("dataset contains non-finite values");
  if (!d.feature_names.empty() && d.feature_names.size() != d.dim())
    throw DataError("feature name count does not match column count");
}

// --- CSV ---

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

std::vector<std::string> split_record(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw DataError("line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(std::move(field));
  return fields;
}

Table read_table(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  Table t;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fields = split_record(line, line_no);
    if (first && has_header) {
      t.header = std::move(fields);
    } else {
      t.rows.push_back(std::move(fields));
      t.line_numbers.push_back(line_no);
    }
    first = false;
  }
  if (first) throw DataError(path.string() + ": empty file");
  if (t.rows.empty()) throw DataError(path.string() + ": no data rows");
  const std::size_t width = has_header ? t.header.size() : t.rows.front().size();
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].size() != width)
      throw DataError("line " + std::to_string(t.line_numbers[r]) + ": expected " +
                      std::to_string(width) + " fields, found " + std::to_string(t.rows[r].size()));
  }
  return t;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& raw, std::size_t line_no, std::size_t col,
                    const std::vector<std::string>& header) {
  const std::string s = trim(raw);
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    std::string where = "line " + std::to_string(line_no) + ", column " + std::to_string(col + 1);
    if (col < header.size()) where += " (\"" + header[col] + "\")";
    throw DataError(where + ": not a finite number: \"" + raw + "\"");
  }
  return v;
}

std::size_t resolve_target(const Table& t, const TargetSpec& target, std::size_t width) {
  for (std::size_t c = 0; c < t.header.size(); ++c)
    if (trim(t.header[c]) == target.column) return c;
  std::size_t idx = 0;
  const std::string s = trim(target.column);
  if (s.empty()) return width - 1;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), idx);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DataError("target column \"" + target.column + "\" not found");
  if (idx >= width)
    throw DataError("target column index " + s + " out of range (" + std::to_string(width) +
                    " columns)");
  return idx;
}

Dataset table_to_dataset(const Table& t, std::optional<std::size_t> target_col) {
  const std::size_t width = t.rows.front().size();
  const std::size_t d = width - (target_col ? 1 : 0);
  Dataset out;
  out.x.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(d));
  out.y = Vector::Zero(static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::size_t k = 0;
    for (std::size_t c = 0; c < width; ++c) {
      const double v = parse_number(t.rows[r][c], t.line_numbers[r], c, t.header);
      if (target_col && c == *target_col)
        out.y[static_cast<Eigen::Index>(r)] = v;
      else
        out.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k++)) = v;
    }
  }
  if (!t.header.empty()) {
    for (std::size_t c = 0; c < width; ++c) {
      if (target_col && c == *target_col)
        out.target_name = trim(t.header[c]);
      else
        out.feature_names.push_back(trim(t.header[c]));
    }
  }
  return out;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const TargetSpec& target, bool has_header) {
  const Table t = read_table(path, has_header);
  const std::size_t width = t.rows.front().size();
  const std::size_t col = resolve_target(t, target, width);
  if (width < 2) throw DataError("need at least one feature column besides the target");
  return table_to_dataset(t, col);
}

Dataset load_csv_features(const std::filesystem::path& path, bool has_header) {
  return table_to_dataset(read_table(path, has_header), std::nullopt);
}

void write_csv(const std::filesystem::path& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << std::setprecision(17);
  for (std::size_t j = 0; j < d.dim(); ++j)
    out << (d.feature_names.size() == d.dim() ? d.feature_names[j] : "x" + std::to_string(j + 1))
        << ',';
  out << (d.target_name.empty() ? "y" : d.target_name) << '\n';
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.x.cols(); ++j) out << d.x(i, j) << ',';
    out << d.y[i] << '\n';
  }
}

// --- standardization ---

Matrix Standardizer::apply(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != dim()) throw DimensionMismatch(dim(), static_cast<std::size_t>(x.cols()));
  Matrix z(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    apply_row(row(x, i), {z.data() + i * z.cols(), static_cast<std::size_t>(z.cols())});
  return z;
}

void Standardizer::apply_row(Point x, std::span<double> out) const {
  if (x.size() != dim()) throw DimensionMismatch(dim(), x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out[j] = scale_features ? (x[j] - mean[jj]) / scale[jj] : x[j];
  }
}

Matrix Standardizer::invert(const Matrix& z) const {
  if (static_cast<std::size_t>(z.cols()) != dim()) throw DimensionMismatch(dim(), static_cast<std::size_t>(z.cols()));
  if (!scale_features) return z;
  Matrix x(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j) x(i, j) = z(i, j) * scale[j] + mean[j];
  return x;
}

Vector Standardizer::apply_target(const Vector& y) const {
  if (!scale_target) return y;
  return ((y.array() - y_mean) / y_scale).matrix();
}

double Standardizer::invert_target(double t) const {
  return scale_target ? t * y_scale + y_mean : t;
}

namespace {

std::pair<double, double> mean_and_scale(const double* data, Eigen::Index n, Eigen::Index stride) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) sum += data[i * stride];
  const double mean = sum / static_cast<double>(n);
  if (n < 2) return {mean, 1.0};
  double ss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double diff = data[i * stride] - mean;
    ss += diff * diff;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return {mean, sd > 0.0 ? sd : 1.0};
}

}  // namespace

Standardizer fit_standardizer(const Dataset& d, bool scale_features, bool scale_target) {
  if (d.size() < 1) throw DataError("cannot standardize an empty dataset");
  Standardizer s;
  s.scale_features = scale_features;
  s.scale_target = scale_target;
  const auto dd = d.x.cols();
  s.mean = Vector::Zero(dd);
  s.scale = Vector::Ones(dd);
  if (scale_features) {
    for (Eigen::Index j = 0; j < dd; ++j) {
      const auto [m, sd] = mean_and_scale(d.x.data() + j, d.x.rows(), dd);
      s.mean[j] = m;
      s.scale[j] = sd;
    }
  }
  if (scale_target) {
    const auto [m, sd] = mean_and_scale(d.y.data(), d.y.size(), 1);
    s.y_mean = m;
    s.y_scale = sd;
  }
  return s;
}

Standardizer identity_standardizer(std::size_t d) {
  Standardizer s;
  s.mean = Vector::Zero(static_cast<Eigen::Index>(d));
  s.scale = Vector::Ones(static_cast<Eigen::Index>(d));
  s.scale_features = false;
  return s;
}

// --- scale heuristic ---

DefaultScale default_scale(const Matrix& x) {
  const auto n = x.rows();
  const auto d = x.cols();
  if (n < 2) throw DataError("default scale needs at least 2 samples");
  if (d < 1) throw DataError("default scale needs at least 1 feature");
  double trace = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) sum += x(i, j);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double diff = x(i, j) - mean;
      ss += diff * diff;
    }
    trace += ss / static_cast<double>(n - 1);
  }
  const double sigma = std::sqrt(trace / static_cast<double>(d));
  if (!(sigma > 0.0)) throw DataError("degenerate scale: all samples identical");
  const double h = 3.5 * sigma * std::pow(static_cast<double>(n), -1.0 / (2.0 + static_cast<double>(d)));
  return {h, 1.0 / h, sigma};
}

// --- generators ---

double sin16_truth(double x) { return std::sin(16.0 * x); }

double counter3d_truth(Point x) {
  double y = 0.0;
  for (std::size_t i = 0; i < 3; ++i) y += 10.0 * x[i] * std::sin(2.0 * x[i] - 3.0);
  return y;
}

namespace {

Dataset uniform_features(std::size_t n, std::size_t d) {
  Dataset out;
  out.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  out.y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < d; ++j) out.feature_names.push_back("x" + std::to_string(j + 1));
  out.target_name = "y";
  return out;
}

}  // namespace

Dataset gen_sin16(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw DataError("generator needs n >= 1");
  Rng rng(seed);
  Dataset out = uniform_features(n, 1);
  for (Eigen::Index i = 0; i < out.x.rows(); ++i) {
    out.x(i, 0) = rng.uniform();
    out.y[i] = sin16_truth(out.x(i, 0)) + 0.1 * rng.normal();
  }
  return out;
}

Dataset gen_counter3d(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw DataError("generator needs n >= 1");
  Rng rng(seed);
  Dataset out = uniform_features(n, 3);
  for (Eigen::Index i = 0; i < out.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) out.x(i, j) = rng.uniform();
    out.y[i] = counter3d_truth(row(out.x, i)) + 0.1 * rng.normal();
  }
  return out;
}

Dataset gen_friedman9(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw DataError("generator needs n >= 1");
  Rng rng(seed);
  Dataset out = uniform_features(n, 9);
  constexpr double kPi = 3.14159265358979323846;
  for (Eigen::Index i = 0; i < out.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < 9; ++j) out.x(i, j) = rng.uniform();
    const auto x = out.x.row(i);
    out.y[i] = 10.0 * std::sin(kPi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) +
               10.0 * x[3] + 5.0 * x[4] + 1.0 * x[5] - 1.0 * x[6] + 0.5 * x[7] - 0.5 * x[8] +
               rng.normal();
  }
  return out;
}

Dataset generate(const std::string& name, std::size_t n, std::uint64_t seed) {
  if (name == "sin16") return gen_sin16(n, seed);
  if (name == "counter3d") return gen_counter3d(n, seed);
  if (name == "friedman9") return gen_friedman9(n, seed);
  throw ConfigError("unknown generator \"" + name + "\" (known: sin16, counter3d, friedman9)");
}

// --- splits ---

std::vector<std::size_t> shuffled_rows(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(rows[i - 1], rows[j]);
  }
  return rows;
}

std::size_t train_size(std::size_t n, double fraction) {
  // Guard against 0.7 * 10 landing a hair above 7.
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

Split split(const Dataset& d, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split fraction must be in (0, 1)");
  const std::size_t n = d.size();
  const std::size_t n_train = train_size(n, fraction);
  if (n_train == 0 || n_train >= n)
    throw DataError("split of " + std::to_string(n) + " rows at fraction " +
                    std::to_string(fraction) + " leaves one side empty");
  const auto rows = shuffled_rows(n, seed);
  const std::span<const std::size_t> all(rows);
  return {d.subset(all.first(n_train)), d.subset(all.subspan(n_train))};
}

}  // namespace hte
