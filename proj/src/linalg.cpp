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

#include "hte/linalg.hpp"

#include <cmath>
#include <iterator>

#include "hte/error.hpp"

namespace hte {

namespace {

double squared_distance(Point a, Point b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

constexpr double kResidualTarget = 1e-8;
constexpr int kRefinementSteps = 3;

}  // namespace

Eigen::MatrixXd gaussian_gram(const Matrix& x, double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("kernel bandwidth gamma must be positive");
  const auto n = x.rows();
  const double inv = 1.0 / (gamma * gamma);
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    k(a, a) = 1.0;
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const double v = std::exp(-squared_distance(row(x, a), row(x, b)) * inv);
      k(a, b) = v;
      k(b, a) = v;
    }
  }
  return k;
}

void gaussian_row(const Matrix& support, Point x, double gamma, std::span<double> out) {
  const double inv = 1.0 / (gamma * gamma);
  for (Eigen::Index a = 0; a < support.rows(); ++a)
    out[static_cast<std::size_t>(a)] = std::exp(-squared_distance(row(support, a), x) * inv);
}

SpdSolveReport solve_spd(const Eigen::MatrixXd& a, const Vector& b) {
  const auto n = a.rows();
  if (a.cols() != n || b.size() != n) throw DimensionMismatch(static_cast<std::size_t>(n), static_cast<std::size_t>(b.size()));

  SpdSolveReport report;
  if (n == 0) {
    report.solution = Vector();
    return report;
  }
  const double mean_diag = a.trace() / static_cast<double>(n);
  const double b_norm = b.norm();

  static constexpr double kLevels[] = {0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};
  constexpr std::size_t kLast = std::size(kLevels) - 1;
  for (std::size_t level = 0; level <= kLast; ++level) {
    if (level > 0 && !(mean_diag > 0.0)) break;
    const double jitter = kLevels[level] * mean_diag;
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      Vector x = llt.solve(b);
      Vector r = b - shifted * x;
      for (int step = 0; step < kRefinementSteps && r.norm() > kResidualTarget * b_norm; ++step) {
        x += llt.solve(r);
        r = b - shifted * x;
      }
      const double rel = b_norm > 0.0 ? r.norm() / b_norm : r.norm();
      if (x.allFinite() && rel <= kResidualTarget) {
        report.solution = std::move(x);
        report.jitter_used = jitter;
        report.relative_residual = rel;
        return report;
      }
    }
    report.escalations = static_cast<int>(level) + 1;
  }
  throw IllConditionedError("Cholesky factorization failed at maximum jitter (n=" +
                            std::to_string(n) + ")");
}

}  // namespace hte
