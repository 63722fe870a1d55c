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

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hte/types.hpp"

namespace hte {

/// What a member predicts for a point whose grid cell saw no training data.
enum class FallbackRule { kZero, kGlobalMean };

std::string to_string(FallbackRule rule);
FallbackRule fallback_rule_from_string(const std::string& name);

/// min(max(t, -m), m). Requires m > 0.
double clip(double t, double m);

/// Per-cell means.
struct ConstantModel {
  std::vector<double> values;
  double fallback = 0.0;
};

/// Groups y by cell id; cells without rows are not allowed.
ConstantModel fit_constant(std::span<const CellId> row_cells, const Vector& y, std::size_t n_cells,
                           FallbackRule rule);

/// Gaussian kernel ridge regressor local to one cell. Cells too small for a
/// kernel fit carry only `mean` and an empty support.
struct KernelCell {
  Matrix support;
  Vector alpha;
  double mean = 0.0;

  bool is_constant() const { return support.rows() == 0; }
};

struct KernelCellModel {
  std::vector<KernelCell> cells;
  double gamma = 1.0;
  double lambda2 = 1e-4;
  double clip_bound = 1.0;
  std::size_t n_total = 1;  // global training size in the n * lambda2 ridge term
  double fallback = 0.0;
};

struct KernelFitOptions {
  double gamma = 1.0;
  double lambda2 = 1e-4;
  double clip_bound = 1.0;
  std::size_t small_cell = 3;  // cells with fewer rows use their mean
  FallbackRule fallback = FallbackRule::kZero;
};

/// Dual coefficients of the cell's regularized least-squares problem
///   min_f lambda2 ||f||^2 + (1/n) sum_{i in cell} (y_i - f(x_i))^2,
/// i.e. alpha = (K + n * lambda2 * I)^{-1} y_cell.
Vector fit_kernel_cell(const Matrix& x_cell, const Vector& y_cell, double gamma, double lambda2,
                       std::size_t n_total);

/// Fits every cell. Cells are independent and fitted in parallel.
KernelCellModel fit_kernel_cells(const Matrix& x, const Vector& y, std::span<const CellId> row_cells,
                                 std::size_t n_cells, const KernelFitOptions& opts);

/// Same result as fit_kernel_cells, one cell at a time.
KernelCellModel fit_kernel_cells_serial(const Matrix& x, const Vector& y,
                                        std::span<const CellId> row_cells, std::size_t n_cells,
                                        const KernelFitOptions& opts);

/// Raw (unclipped) kernel expansion of one cell at x.
double kernel_cell_value(const KernelCell& cell, double gamma, Point x);

using CellModel = std::variant<ConstantModel, KernelCellModel>;

/// Constant: c_cell or fallback. Kernel: clip(sum_a alpha_a k(x, x_a)) with
/// the cell's own support points only. No cell: fallback.
double predict_cell(const ConstantModel& model, std::optional<CellId> cell, Point x);
double predict_cell(const KernelCellModel& model, std::optional<CellId> cell, Point x);
double predict_cell(const CellModel& model, std::optional<CellId> cell, Point x);

std::size_t n_cells(const CellModel& model);

}  // namespace hte
