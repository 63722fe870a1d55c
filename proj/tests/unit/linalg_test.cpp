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
#include <vector>

#include "hte/error.hpp"
#include "hte/linalg.hpp"
#include "hte/transform.hpp"
#include "test_util.hpp"

namespace hte {
namespace {

// ||A x - b|| / ||b|| with plain loops.
double residual(const Eigen::MatrixXd& a, double jitter, const Vector& x, const Vector& b) {
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double s = jitter * x[i];
    for (Eigen::Index j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    num += (s - b[i]) * (s - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

TEST(GaussianGram, UnitDiagonalAndSymmetric) {
  const Matrix x = testing::uniform_matrix(40, 3, 1);
  const auto k = gaussian_gram(x, 0.7);
  for (Eigen::Index i = 0; i < 40; ++i) {
    EXPECT_EQ(k(i, i), 1.0);
    for (Eigen::Index j = 0; j < 40; ++j) EXPECT_EQ(k(i, j), k(j, i));
  }
}

TEST(GaussianGram, UnitScaledDistanceGivesInverseE) {
  Matrix x(2, 2);
  x << 0.0, 0.0, 0.3, 0.4;  // distance 0.5
  const auto k = gaussian_gram(x, 0.5);
  EXPECT_NEAR(k(0, 1), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(k(0, 1), 0.3678794, 1e-7);
}

TEST(GaussianGram, FlatLimit) {
  const Matrix x = testing::uniform_matrix(10, 4, 2, -5, 5);
  const auto k = gaussian_gram(x, 1e12);
  EXPECT_LE((k.array() - 1.0).abs().maxCoeff(), 1e-10);
}

TEST(GaussianGram, MatchesRowFunction) {
  const Matrix x = testing::uniform_matrix(15, 2, 3);
  const auto k = gaussian_gram(x, 0.4);
  std::vector<double> r(15);
  for (Eigen::Index i = 0; i < 15; ++i) {
    gaussian_row(x, row(x, i), 0.4, r);
    for (Eigen::Index j = 0; j < 15; ++j) EXPECT_NEAR(r[j], k(i, j), 1e-15);
  }
}

TEST(GaussianGram, RejectsNonPositiveBandwidth) {
  EXPECT_THROW(gaussian_gram(testing::uniform_matrix(3, 1, 1), 0.0), ConfigError);
}

TEST(SolveSpd, IdentityReturnsRhs) {
  const Vector b = testing::normal_vector(7, 4);
  const auto r = solve_spd(Eigen::MatrixXd::Identity(7, 7), b);
  EXPECT_EQ(r.solution, b);
  EXPECT_EQ(r.jitter_used, 0.0);
  EXPECT_EQ(r.escalations, 0);
}

TEST(SolveSpd, HandTwoByTwo) {
  Eigen::MatrixXd a(2, 2);
  a << 2, 1, 1, 2;
  const auto r = solve_spd(a, Vector::Ones(2));
  EXPECT_NEAR(r.solution[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.solution[1], 1.0 / 3.0, 1e-15);
}

TEST(SolveSpd, ZeroMatrixFailsAfterEscalation) {
  EXPECT_THROW(solve_spd(Eigen::MatrixXd::Zero(3, 3), Vector::Ones(3)), IllConditionedError);
}

TEST(SolveSpd, SemidefiniteGramNeedsJitter) {
  // Repeated support points make the Gram matrix singular.
  Matrix x(4, 1);
  x << 0.1, 0.1, 0.5, 0.5;
  const auto k = gaussian_gram(x, 1.0);
  Vector b(4);
  b << 1, 1, 2, 2;
  const auto r = solve_spd(k, b);
  EXPECT_LE(r.relative_residual, 1e-8);
  EXPECT_LE(residual(k, r.jitter_used, r.solution, b), 1e-8);
}

TEST(SolveSpd, RandomSpdResidual) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t n = 1 + seed * 3;
    const Matrix g = testing::uniform_matrix(n, n, seed, -1, 1);
    const Eigen::MatrixXd a = g * g.transpose() + 1e-3 * Eigen::MatrixXd::Identity(n, n);
    const Vector b = testing::normal_vector(n, seed + 100);
    const auto r = solve_spd(a, b);
    EXPECT_LE(residual(a, r.jitter_used, r.solution, b), 1e-8) << "n=" << n;
    EXPECT_NEAR(r.relative_residual, residual(a, r.jitter_used, r.solution, b), 1e-12);
  }
}

TEST(SolveSpd, RecoversKnownSolutionUpToCondition1e8) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t n = 30;
    Rng rng(seed);
    const Eigen::MatrixXd q = sample_rotation(n, rng);
    Vector eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = std::pow(10.0, -8.0 * i / (n - 1.0));
    const Eigen::MatrixXd a0 = q * eig.asDiagonal() * q.transpose();
    const Eigen::MatrixXd a = 0.5 * (a0 + a0.transpose());
    const Vector x0 = testing::normal_vector(n, seed + 7);
    const auto r = solve_spd(a, a * x0);
    EXPECT_LE((r.solution - x0).norm() / x0.norm(), 1e-7);
  }
}

TEST(SolveSpd, MatchesGaussJordanOracle) {
  const Matrix x = testing::uniform_matrix(25, 2, 9);
  Eigen::MatrixXd a = gaussian_gram(x, 0.5);
  a.diagonal().array() += 0.05;
  const Vector b = testing::normal_vector(25, 10);
  std::vector<std::vector<double>> rows(25, std::vector<double>(25));
  for (int i = 0; i < 25; ++i)
    for (int j = 0; j < 25; ++j) rows[i][j] = a(i, j);
  const auto want = testing::gauss_jordan_solve(rows, std::vector<double>(b.data(), b.data() + 25));
  EXPECT_LE(testing::relative_error(solve_spd(a, b).solution, want), 1e-10);
}

TEST(SolveSpd, DimensionMismatch) {
  EXPECT_THROW(solve_spd(Eigen::MatrixXd::Identity(3, 3), Vector::Ones(2)), DimensionMismatch);
}

}  // namespace
}  // namespace hte
