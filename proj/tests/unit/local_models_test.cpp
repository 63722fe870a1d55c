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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "hte/error.hpp"
#include "hte/local_models.hpp"
#include "hte/partition.hpp"
#include "test_util.hpp"

namespace hte {
namespace {

using testing::pt;

TEST(Clip, Examples) {
  EXPECT_EQ(clip(2.0, 1.0), 1.0);
  EXPECT_EQ(clip(-3.0, 1.0), -1.0);
  EXPECT_EQ(clip(0.5, 1.0), 0.5);
  EXPECT_EQ(clip(1.0, 1.0), 1.0);
}

TEST(FitConstant, CellMeans) {
  const std::vector<CellId> cells{0, 0, 1};
  Vector y(3);
  y << 1, 3, 5;
  const auto m = fit_constant(cells, y, 2, FallbackRule::kZero);
  EXPECT_EQ(m.values, (std::vector<double>{2.0, 5.0}));
  EXPECT_EQ(predict_cell(m, CellId{0}, pt({0.0})), 2.0);
  EXPECT_EQ(predict_cell(m, std::nullopt, pt({0.0})), 0.0);
}

TEST(FitConstant, GlobalMeanFallback) {
  const std::vector<CellId> cells{0, 0, 1};
  Vector y(3);
  y << 1, 3, 5;
  const auto m = fit_constant(cells, y, 2, FallbackRule::kGlobalMean);
  EXPECT_DOUBLE_EQ(m.fallback, 3.0);
  EXPECT_DOUBLE_EQ(predict_cell(m, std::nullopt, pt({0.0})), 3.0);
}

TEST(FitConstant, EmptyCellRejected) {
  const std::vector<CellId> cells{0, 0};
  EXPECT_THROW(fit_constant(cells, Vector::Ones(2), 2, FallbackRule::kZero), TrainingError);
}

TEST(FitConstant, MatchesBruteForceMeans) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 50 + seed * 20;
    Rng rng(seed);
    const auto h = sample_transform(2, 0.1, 0.4, rng);
    const Matrix x = testing::uniform_matrix(n, 2, seed);
    const Vector y = testing::normal_vector(n, seed + 1);
    const auto g = build_grid(h, x);
    const auto m = fit_constant(g.row_cells, y, g.partition.n_cells(), FallbackRule::kZero);
    // brute force: gather by exact key
    std::map<BinKey, std::pair<double, int>> acc;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      auto& a = acc[bin_key(h, row(x, i))];
      a.first += y[i];
      ++a.second;
    }
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const auto& a = acc[bin_key(h, row(x, i))];
      ASSERT_NEAR(predict_cell(m, g.partition.assign(row(x, i)), row(x, i)), a.first / a.second, 1e-12);
    }
  }
}

TEST(FitKernelCell, SinglePointClosedForm) {
  Matrix x(1, 2);
  x << 0.3, 0.6;
  Vector y(1);
  y << 3.0;
  const double l2 = 0.25;
  const Vector a = fit_kernel_cell(x, y, 1.0, l2, 1);
  EXPECT_NEAR(a[0], 3.0 / (1.0 + l2), 1e-15);
}

TEST(FitKernelCell, InterpolatesInSmallRidgeLimit) {
  Matrix x(3, 1);
  x << 0.0, 0.5, 1.0;
  Vector y(3);
  y << 1.0, -2.0, 0.5;
  KernelCell c;
  c.support = x;
  c.alpha = fit_kernel_cell(x, y, 0.6, 1e-12, 3);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(kernel_cell_value(c, 0.6, row(x, i)), y[i], 1e-6);
}

TEST(FitKernelCell, HandTwoByTwo) {
  Matrix x(2, 1);
  x << 0.0, 1.0;
  Vector y(2);
  y << 1.0, 2.0;
  const double gamma = 1.0, l2 = 0.1;
  const std::size_t n = 4;
  // [[1 + 0.4, k], [k, 1 + 0.4]] with k = e^{-1}
  const double k = std::exp(-1.0), d = 1.0 + n * l2;
  const double det = d * d - k * k;
  const Vector a = fit_kernel_cell(x, y, gamma, l2, n);
  EXPECT_NEAR(a[0], (d * 1.0 - k * 2.0) / det, 1e-10);
  EXPECT_NEAR(a[1], (d * 2.0 - k * 1.0) / det, 1e-10);
}

TEST(FitKernelCell, MatchesDenseOracleOnRandomCells) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const std::size_t nj = 1 + rng.below(50);
    const std::size_t d = 1 + rng.below(4);
    const Matrix x = testing::uniform_matrix(nj, d, seed + 1000);
    const Vector y = testing::normal_vector(nj, seed + 2000);
    const double gamma = rng.uniform(0.2, 2.0);
    const double l2 = std::pow(10.0, rng.uniform(-5.0, -2.0));
    const std::size_t n = nj + rng.below(1000);
    const Vector a = fit_kernel_cell(x, y, gamma, l2, n);
    EXPECT_LE(testing::relative_error(a, testing::krr_oracle(x, y, gamma, l2, n)), 1e-8) << seed;
  }
}

TEST(FitKernelCell, PreconditionsChecked) {
  const Matrix x = testing::uniform_matrix(3, 1, 1);
  const Vector y = Vector::Ones(3);
  EXPECT_THROW(fit_kernel_cell(x, y, 0.0, 1e-3, 3), ConfigError);
  EXPECT_THROW(fit_kernel_cell(x, y, 1.0, 0.0, 3), ConfigError);
  EXPECT_THROW(fit_kernel_cell(x, y, 1.0, 1e-3, 2), ConfigError);
  EXPECT_THROW(fit_kernel_cell(Matrix(0, 1), Vector(0), 1.0, 1e-3, 2), TrainingError);
}

TEST(PredictKernel, SingleSupportShrinkage) {
  Matrix x(1, 1);
  x << 0.2;
  Vector y(1);
  y << 3.0;
  KernelFitOptions o;
  o.gamma = 1.0;
  o.lambda2 = 1.0;
  o.clip_bound = 10.0;
  o.small_cell = 1;
  const std::vector<CellId> cells{0};
  const auto m = fit_kernel_cells(x, y, cells, 1, o);
  EXPECT_NEAR(predict_cell(m, CellId{0}, pt({0.2})), 1.5, 1e-15);
}

TEST(PredictKernel, RawValueIsClipped) {
  KernelCellModel m;
  KernelCell c;
  c.support = Matrix::Zero(1, 1);
  c.alpha = Vector::Constant(1, 2.4);
  m.cells.push_back(c);
  m.gamma = 1.0;
  m.clip_bound = 1.0;
  EXPECT_NEAR(kernel_cell_value(m.cells[0], 1.0, pt({0.0})), 2.4, 1e-15);
  EXPECT_EQ(predict_cell(m, CellId{0}, pt({0.0})), 1.0);
  EXPECT_EQ(predict_cell(m, std::nullopt, pt({0.0})), 0.0);
}

TEST(PredictKernel, SmallCellsUseTheirMean) {
  Matrix x(5, 1);
  x << 0.1, 0.2, 0.3, 5.1, 5.2;
  Vector y(5);
  y << 1, 2, 3, 4, 8;
  const std::vector<CellId> cells{0, 0, 0, 1, 1};
  KernelFitOptions o;
  o.clip_bound = 10.0;
  o.small_cell = 3;
  const auto m = fit_kernel_cells(x, y, cells, 2, o);
  EXPECT_FALSE(m.cells[0].is_constant());
  EXPECT_TRUE(m.cells[1].is_constant());
  EXPECT_EQ(predict_cell(m, CellId{1}, pt({5.15})), 6.0);
}

TEST(PredictKernel, ParallelAndSerialFitsAgree) {
  const Matrix x = testing::uniform_matrix(600, 2, 3);
  const Vector y = testing::normal_vector(600, 4);
  Rng rng(5);
  const auto g = build_grid(sample_transform(2, 0.2, 0.3, rng), x);
  KernelFitOptions o;
  o.clip_bound = 5.0;
  const auto a = fit_kernel_cells(x, y, g.row_cells, g.partition.n_cells(), o);
  const auto b = fit_kernel_cells_serial(x, y, g.row_cells, g.partition.n_cells(), o);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (std::size_t j = 0; j < a.cells.size(); ++j) {
    EXPECT_EQ(a.cells[j].alpha, b.cells[j].alpha);
    EXPECT_EQ(a.cells[j].support, b.cells[j].support);
  }
}

TEST(PredictKernel, PredictionsAreCellLocal) {
  const Matrix x = testing::uniform_matrix(300, 2, 8);
  Vector y = testing::normal_vector(300, 9);
  Rng rng(10);
  const auto g = build_grid(sample_transform(2, 0.3, 0.5, rng), x);
  KernelFitOptions o;
  o.clip_bound = 10.0;
  const auto before = fit_kernel_cells(x, y, g.row_cells, g.partition.n_cells(), o);
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (g.row_cells[i] == 0) y[i] += 3.0;
  const auto after = fit_kernel_cells(x, y, g.row_cells, g.partition.n_cells(), o);
  const Matrix q = testing::uniform_matrix(500, 2, 11);
  int checked = 0;
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    const auto c = g.partition.assign(row(q, i));
    if (!c || *c == 0) continue;
    ++checked;
    EXPECT_EQ(predict_cell(before, c, row(q, i)), predict_cell(after, c, row(q, i)));
  }
  EXPECT_GT(checked, 0);
}

TEST(PredictKernel, ClippingNeverIncreasesTrainingRisk) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Matrix x = testing::uniform_matrix(200, 2, seed);
    Vector y = testing::normal_vector(200, seed + 50, 2.0);
    const double m_clip = 1.5;
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = clip(y[i], m_clip);
    Rng rng(seed);
    const auto g = build_grid(sample_transform(2, 0.3, 0.6, rng), x);
    KernelFitOptions o;
    o.clip_bound = m_clip;
    o.lambda2 = 1e-6;
    o.gamma = 0.2;
    const auto m = fit_kernel_cells(x, y, g.row_cells, g.partition.n_cells(), o);
    double raw = 0.0, clipped = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const auto& cell = m.cells[g.row_cells[i]];
      const double f = cell.is_constant() ? cell.mean : kernel_cell_value(cell, o.gamma, row(x, i));
      const double fc = predict_cell(m, g.row_cells[i], row(x, i));
      EXPECT_EQ(fc, clip(f, m_clip));
      raw += (y[i] - f) * (y[i] - f);
      clipped += (y[i] - fc) * (y[i] - fc);
    }
    EXPECT_LE(clipped, raw);
  }
}

TEST(FallbackRule, StringRoundTrip) {
  EXPECT_EQ(fallback_rule_from_string("zero"), FallbackRule::kZero);
  EXPECT_EQ(fallback_rule_from_string(to_string(FallbackRule::kGlobalMean)), FallbackRule::kGlobalMean);
  EXPECT_THROW(fallback_rule_from_string("median"), ConfigError);
}

}  // namespace
}  // namespace hte
