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
#include <vector>

#include "hte/rng.hpp"
#include "hte/types.hpp"

namespace hte {

/// One randomized partition of input space: H(x) = R * diag(s) * x + b.
/// The unit integer grid in the image of H defines the cells.
struct HistogramTransform {
  Eigen::MatrixXd rotation;  // orthonormal, det = +1
  Vector scales;             // s_i > 0, bin width h_i = 1 / s_i
  Vector translation;        // b_i in [0, 1)
  double h_lower = 1.0;
  double h_upper = 1.0;

  std::size_t dim() const { return static_cast<std::size_t>(scales.size()); }
};

using BinKey = std::vector<std::int64_t>;

/// Random rotation from the QR decomposition of a standard-normal matrix,
/// with the triangular factor's diagonal forced positive and one column of
/// Q negated when det(Q) = -1. d = 1 returns [1] without consuming rng.
Eigen::MatrixXd sample_rotation(std::size_t d, Rng& rng);

/// Draws log(s_i) uniformly on [log(1/h_upper), log(1/h_lower)] and b_i
/// uniformly on [0, 1) around an already chosen rotation.
HistogramTransform sample_stretch_and_shift(Eigen::MatrixXd rotation, double h_lower,
                                            double h_upper, Rng& rng);

/// Full transform: rotation first, then stretching and translation, all from rng.
/// Throws ConfigError unless 0 < h_lower <= h_upper.
HistogramTransform sample_transform(std::size_t d, double h_lower, double h_upper, Rng& rng);

/// R * (S * x) + b. Throws DimensionMismatch.
Vector apply(const HistogramTransform& h, Point x);

/// Component-wise floor of apply(h, x).
BinKey bin_key(const HistogramTransform& h, Point x);

/// Writes the bin key of x into `out` without allocating; `scratch` must
/// hold 2 * h.dim() entries.
void bin_key_into(const HistogramTransform& h, Point x, std::span<double> scratch,
                  std::span<std::int64_t> out);

/// Lebesgue volume of every cell, prod(1 / s_i).
double cell_volume(const HistogramTransform& h);

/// Max-norm of R^T R - I.
double orthogonality_error(const Eigen::MatrixXd& r);

}  // namespace hte
