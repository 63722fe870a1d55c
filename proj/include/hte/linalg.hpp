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

#include "hte/types.hpp"

namespace hte {

/// K(a, b) = exp(-||x_a - x_b||^2 / gamma^2), unit diagonal, exactly symmetric.
Eigen::MatrixXd gaussian_gram(const Matrix& x, double gamma);

/// Kernel row of a query against support points.
void gaussian_row(const Matrix& support, Point x, double gamma, std::span<double> out);

struct SpdSolveReport {
  Vector solution;
  double jitter_used = 0.0;
  int escalations = 0;  // number of failed factorizations before success
  double relative_residual = 0.0;
};

/// Cholesky solve of A x = b. On factorization failure retries with
/// A + eps * trace(A) / n * I for eps = 1e-12, 1e-11, ..., 1e-6 and throws
/// IllConditionedError when the last level fails too.
SpdSolveReport solve_spd(const Eigen::MatrixXd& a, const Vector& b);

}  // namespace hte
