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

#include "hte/local_models.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "hte/error.hpp"
#include "hte/linalg.hpp"

namespace hte {

std::string to_string(FallbackRule rule) {
  return rule == FallbackRule::kZero ? "zero" : "global_mean";
}

FallbackRule fallback_rule_from_string(const std::string& name) {
  if (name == "zero") return FallbackRule::kZero;
  if (name == "global_mean") return FallbackRule::kGlobalMean;
  throw ConfigError("fallback must be \"zero\" or \"global_mean\", got \"" + name + "\"");
}

double clip(double t, double m) { return std::min(std::max(t, -m), m); }

namespace {

double fallback_value(const Vector& y, FallbackRule rule) {
  if (rule == FallbackRule::kZero || y.size() == 0) return 0.0;
  return y.mean();
}

// Row indices grouped by cell, each group in ascending row order.
std::vector<std::vector<Eigen::Index>> group_rows(std::span<const CellId> row_cells,
                                                  std::size_t n_cells) {
  std::vector<std::vector<Eigen::Index>> groups(n_cells);
  for (std::size_t i = 0; i < row_cells.size(); ++i) {
    if (row_cells[i] >= n_cells) throw TrainingError("cell id out of range");
    groups[row_cells[i]].push_back(static_cast<Eigen::Index>(i));
  }
  return groups;
}

KernelCell fit_one(const Matrix& x, const Vector& y, const std::vector<Eigen::Index>& rows,
                   const KernelFitOptions& opts, std::size_t n_total) {
  if (rows.empty()) throw TrainingError("cannot fit an empty cell");
  KernelCell cell;
  double sum = 0.0;
  for (auto r : rows) sum += y[r];
  cell.mean = sum / static_cast<double>(rows.size());
  if (rows.size() < opts.small_cell) return cell;

  Matrix xs(static_cast<Eigen::Index>(rows.size()), x.cols());
  Vector ys(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    xs.row(static_cast<Eigen::Index>(k)) = x.row(rows[k]);
    ys[static_cast<Eigen::Index>(k)] = y[rows[k]];
  }
  cell.alpha = fit_kernel_cell(xs, ys, opts.gamma, opts.lambda2, n_total);
  cell.support = std::move(xs);
  return cell;
}

KernelCellModel empty_kernel_model(const Vector& y, const KernelFitOptions& opts,
                                   std::size_t n_cells) {
  if (!(opts.clip_bound > 0.0)) throw ConfigError("clip bound must be positive");
  KernelCellModel model;
  model.cells.resize(n_cells);
  model.gamma = opts.gamma;
  model.lambda2 = opts.lambda2;
  model.clip_bound = opts.clip_bound;
  model.n_total = static_cast<std::size_t>(y.size());
  model.fallback = fallback_value(y, opts.fallback);
  return model;
}

}  // namespace

ConstantModel fit_constant(std::span<const CellId> row_cells, const Vector& y, std::size_t n_cells,
                           FallbackRule rule) {
  if (row_cells.size() != static_cast<std::size_t>(y.size()))
    throw DimensionMismatch(row_cells.size(), static_cast<std::size_t>(y.size()));
  std::vector<double> sums(n_cells, 0.0);
  std::vector<std::size_t> counts(n_cells, 0);
  for (std::size_t i = 0; i < row_cells.size(); ++i) {
    if (row_cells[i] >= n_cells) throw TrainingError("cell id out of range");
    sums[row_cells[i]] += y[static_cast<Eigen::Index>(i)];
    ++counts[row_cells[i]];
  }
  ConstantModel model;
  model.values.resize(n_cells);
  for (std::size_t j = 0; j < n_cells; ++j) {
    if (counts[j] == 0) throw TrainingError("cell " + std::to_string(j) + " has no samples");
    model.values[j] = sums[j] / static_cast<double>(counts[j]);
  }
  model.fallback = fallback_value(y, rule);
  return model;
}

Vector fit_kernel_cell(const Matrix& x_cell, const Vector& y_cell, double gamma, double lambda2,
                       std::size_t n_total) {
  const auto nj = x_cell.rows();
  if (nj < 1) throw TrainingError("cannot fit an empty cell");
  if (y_cell.size() != nj) throw DimensionMismatch(static_cast<std::size_t>(nj), static_cast<std::size_t>(y_cell.size()));
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (!(lambda2 > 0.0)) throw ConfigError("lambda2 must be positive");
  if (n_total < static_cast<std::size_t>(nj)) throw ConfigError("global size smaller than cell size");

  Eigen::MatrixXd k = gaussian_gram(x_cell, gamma);
  k.diagonal().array() += static_cast<double>(n_total) * lambda2;
  return solve_spd(k, y_cell).solution;
}

KernelCellModel fit_kernel_cells(const Matrix& x, const Vector& y, std::span<const CellId> row_cells,
                                 std::size_t n_cells, const KernelFitOptions& opts) {
  KernelCellModel model = empty_kernel_model(y, opts, n_cells);
  const auto groups = group_rows(row_cells, n_cells);
  std::vector<std::exception_ptr> errors(n_cells);
  const auto count = static_cast<std::int64_t>(n_cells);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t j = 0; j < count; ++j) {
    const auto cell = static_cast<std::size_t>(j);
    try {
      model.cells[cell] = fit_one(x, y, groups[cell], opts, model.n_total);
    } catch (...) {
      errors[cell] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return model;
}

KernelCellModel fit_kernel_cells_serial(const Matrix& x, const Vector& y,
                                        std::span<const CellId> row_cells, std::size_t n_cells,
                                        const KernelFitOptions& opts) {
  KernelCellModel model = empty_kernel_model(y, opts, n_cells);
  const auto groups = group_rows(row_cells, n_cells);
  for (std::size_t j = 0; j < n_cells; ++j)
    model.cells[j] = fit_one(x, y, groups[j], opts, model.n_total);
  return model;
}

double kernel_cell_value(const KernelCell& cell, double gamma, Point x) {
  if (cell.is_constant()) return cell.mean;
  const double inv = 1.0 / (gamma * gamma);
  double acc = 0.0;
  for (Eigen::Index a = 0; a < cell.support.rows(); ++a) {
    double dist = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double diff = cell.support(a, static_cast<Eigen::Index>(k)) - x[k];
      dist += diff * diff;
    }
    acc += cell.alpha[a] * std::exp(-dist * inv);
  }
  return acc;
}

double predict_cell(const ConstantModel& model, std::optional<CellId> cell, Point) {
  if (!cell || *cell >= model.values.size()) return model.fallback;
  return model.values[*cell];
}

double predict_cell(const KernelCellModel& model, std::optional<CellId> cell, Point x) {
  if (!cell || *cell >= model.cells.size()) return model.fallback;
  return clip(kernel_cell_value(model.cells[*cell], model.gamma, x), model.clip_bound);
}

double predict_cell(const CellModel& model, std::optional<CellId> cell, Point x) {
  return std::visit([&](const auto& m) { return predict_cell(m, cell, x); }, model);
}

std::size_t n_cells(const CellModel& model) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ConstantModel>)
          return m.values.size();
        else
          return m.cells.size();
      },
      model);
}

}  // namespace hte
