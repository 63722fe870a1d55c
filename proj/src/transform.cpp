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

#include "hte/transform.hpp"

#include <algorithm>
#include <cmath>

#include "hte/error.hpp"

namespace hte {

namespace {

std::int64_t floor_to_key(double v) {
  // Keys past +-2^62 only occur for absurd inputs; saturate instead of UB.
  constexpr double kLimit = 4.611686018427387904e18;
  const double f = std::floor(v);
  if (!(f > -kLimit)) return -static_cast<std::int64_t>(kLimit);
  if (!(f < kLimit)) return static_cast<std::int64_t>(kLimit);
  return static_cast<std::int64_t>(f);
}

}  // namespace

Eigen::MatrixXd sample_rotation(std::size_t d, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(d);
  if (d <= 1) return Eigen::MatrixXd::Identity(n, n);

  Eigen::MatrixXd gauss(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) gauss(i, j) = rng.normal();

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd& packed = qr.matrixQR();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (packed(i, i) < 0.0) q.col(i) = -q.col(i);
  }
  if (q.determinant() < 0.0) q.col(0) = -q.col(0);
  return q;
}

HistogramTransform sample_stretch_and_shift(Eigen::MatrixXd rotation, double h_lower,
                                            double h_upper, Rng& rng) {
  if (!(h_lower > 0.0) || !(h_lower <= h_upper) || !std::isfinite(h_upper))
    throw ConfigError("bin width bounds must satisfy 0 < h_lower <= h_upper");

  const auto d = rotation.rows();
  HistogramTransform h;
  h.rotation = std::move(rotation);
  h.h_lower = h_lower;
  h.h_upper = h_upper;
  h.scales.resize(d);
  h.translation.resize(d);

  const double s_lo = 1.0 / h_upper;
  const double s_hi = 1.0 / h_lower;
  const double log_lo = std::log(s_lo);
  const double log_hi = std::log(s_hi);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (h_lower == h_upper) {
      h.scales[i] = s_lo;
    } else {
      h.scales[i] = std::clamp(std::exp(rng.uniform(log_lo, log_hi)), s_lo, s_hi);
    }
  }
  for (Eigen::Index i = 0; i < d; ++i) h.translation[i] = rng.uniform();
  return h;
}

HistogramTransform sample_transform(std::size_t d, double h_lower, double h_upper, Rng& rng) {
  if (!(h_lower > 0.0) || !(h_lower <= h_upper))
    throw ConfigError("bin width bounds must satisfy 0 < h_lower <= h_upper");
  return sample_stretch_and_shift(sample_rotation(d, rng), h_lower, h_upper, rng);
}

namespace {

// Fixed summation order so apply() and bin_key() agree bit for bit.
void apply_into(const HistogramTransform& h, Point x, std::span<double> scratch,
                std::span<double> out) {
  const std::size_t d = h.dim();
  for (std::size_t j = 0; j < d; ++j) scratch[j] = h.scales[static_cast<Eigen::Index>(j)] * x[j];
  for (std::size_t i = 0; i < d; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j)
      acc += h.rotation(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * scratch[j];
    out[i] = acc + h.translation[static_cast<Eigen::Index>(i)];
  }
}

}  // namespace

Vector apply(const HistogramTransform& h, Point x) {
  if (x.size() != h.dim()) throw DimensionMismatch(h.dim(), x.size());
  std::vector<double> scratch(h.dim());
  Vector out(static_cast<Eigen::Index>(h.dim()));
  apply_into(h, x, scratch, {out.data(), h.dim()});
  return out;
}

void bin_key_into(const HistogramTransform& h, Point x, std::span<double> scratch,
                  std::span<std::int64_t> out) {
  const std::size_t d = h.dim();
  if (x.size() != d) throw DimensionMismatch(d, x.size());
  apply_into(h, x, scratch.subspan(0, d), scratch.subspan(d, d));
  for (std::size_t i = 0; i < d; ++i) out[i] = floor_to_key(scratch[d + i]);
}

BinKey bin_key(const HistogramTransform& h, Point x) {
  if (x.size() != h.dim()) throw DimensionMismatch(h.dim(), x.size());
  std::vector<double> scratch(2 * h.dim());
  BinKey key(h.dim());
  bin_key_into(h, x, scratch, key);
  return key;
}

double cell_volume(const HistogramTransform& h) {
  double vol = 1.0;
  for (Eigen::Index i = 0; i < h.scales.size(); ++i) vol /= h.scales[i];
  return vol;
}

double orthogonality_error(const Eigen::MatrixXd& r) {
  const auto n = r.rows();
  return (r.transpose() * r - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
}

}  // namespace hte
