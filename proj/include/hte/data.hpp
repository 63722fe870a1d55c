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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hte/types.hpp"

namespace hte {

struct Dataset {
  Matrix x;
  Vector y;
  std::vector<std::string> feature_names;  // empty when the source had no header
  std::string target_name;

  std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(x.cols()); }

  /// Rows in the given order.
  Dataset subset(std::span<const std::size_t> rows) const;
};

/// Throws DataError on non-finite entries or inconsistent shapes.
void validate(const Dataset& d);

// --- CSV ---

/// Target column selector: a header name or a zero-based index. A selector
/// that parses as an integer is treated as an index only when no header
/// column has that exact name. Empty selects the last column.
struct TargetSpec {
  std::string column;
};

/// Comma-separated numbers, optional header, optional quoting. Every cell
/// must be a finite decimal number; failures name the row and column.
Dataset load_csv(const std::filesystem::path& path, const TargetSpec& target, bool has_header);

/// Reads all columns as features (no target).
Dataset load_csv_features(const std::filesystem::path& path, bool has_header);

void write_csv(const std::filesystem::path& path, const Dataset& d);

// --- standardization ---

struct Standardizer {
  Vector mean;
  Vector scale;  // sample std (n - 1), 1 for constant columns
  bool scale_features = true;
  bool scale_target = false;
  double y_mean = 0.0;
  double y_scale = 1.0;

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }

  Matrix apply(const Matrix& x) const;
  Matrix invert(const Matrix& z) const;
  void apply_row(Point x, std::span<double> out) const;
  Vector apply_target(const Vector& y) const;
  double invert_target(double t) const;
};

Standardizer fit_standardizer(const Dataset& d, bool scale_features = true, bool scale_target = false);

/// Identity standardizer of dimension d.
Standardizer identity_standardizer(std::size_t d);

// --- scale heuristic ---

struct DefaultScale {
  double bin_width;  // h = 3.5 * sigma * n^{-1/(2+d)}
  double scale;      // s = 1 / h
  double sigma;      // sqrt(trace(V) / d), V the sample covariance
};

/// Throws DataError for n < 2 or sigma = 0.
DefaultScale default_scale(const Matrix& x);

// --- synthetic generators ---

/// Y = sin(16 X) + eps, X ~ U[0,1], eps ~ N(0, 0.1^2).
Dataset gen_sin16(std::size_t n, std::uint64_t seed);

/// Y = sum_{i=1..3} 10 X_i sin(2 X_i - 3) + eps, X ~ U[0,1]^3, eps ~ N(0, 0.1^2).
Dataset gen_counter3d(std::size_t n, std::uint64_t seed);

/// Nine-feature stand-in for tabular benchmark data: Friedman #1 on the
/// first five features plus weak linear terms on the remaining four,
/// eps ~ N(0, 1).
Dataset gen_friedman9(std::size_t n, std::uint64_t seed);

double sin16_truth(double x);
double counter3d_truth(Point x);

/// Generator by name: "sin16", "counter3d", "friedman9".
Dataset generate(const std::string& name, std::size_t n, std::uint64_t seed);

// --- splits ---

struct Split {
  Dataset train;
  Dataset test;
};

/// Seeded shuffle; the first ceil(fraction * n) shuffled rows form train.
/// Throws DataError if either side would be empty.
Split split(const Dataset& d, double fraction, std::uint64_t seed);

/// The row permutation used by split().
std::vector<std::size_t> shuffled_rows(std::size_t n, std::uint64_t seed);
std::size_t train_size(std::size_t n, double fraction);

}  // namespace hte
