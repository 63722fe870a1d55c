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
#include <optional>
#include <string>
#include <vector>

#include "hte/data.hpp"
#include "hte/local_models.hpp"
#include "hte/partition.hpp"

namespace hte {

enum class Mode { kNht, kKht };
enum class PartitionKind { kGrid, kAdaptive };

std::string to_string(Mode mode);
std::string to_string(PartitionKind kind);
Mode mode_from_string(const std::string& name);
PartitionKind partition_from_string(const std::string& name);

/// Offsets of the log-scale interval around log(s_hat): log s_i is drawn from
/// [s_min + log s_hat, s_max + log s_hat].
struct ScalePair {
  double s_min = 0.0;
  double s_max = 1.0;

  bool operator==(const ScalePair&) const = default;
};

std::vector<ScalePair> default_candidate_scales();

struct TrainConfig {
  Mode mode = Mode::kNht;
  PartitionKind partition = PartitionKind::kGrid;
  std::size_t members = 10;     // T
  std::size_t candidates = 1;   // best-scored candidates per member
  double s_min = 0.0;           // used when candidates == 1
  double s_max = 1.0;
  std::vector<ScalePair> candidate_scales = default_candidate_scales();
  std::size_t min_leaf = 1200;  // adaptive splitting threshold m
  double gamma = 1.0;
  double lambda2 = 1e-4;
  double lambda1 = 0.0;         // bin-width penalty weight; bookkeeping only
  double q = 1.0;               // bin-width penalty exponent; bookkeeping only
  std::optional<double> clip_bound;  // none: max |y| of the (scaled) training targets
  std::size_t small_cell = 3;   // KHT cells below this size predict their mean
  FallbackRule fallback = FallbackRule::kZero;
  double validation_fraction = 0.3;
  std::uint64_t seed = 0;
  bool standardize_features = true;
  bool standardize_target = false;

  bool operator==(const TrainConfig&) const = default;
};

/// Throws ConfigError naming the offending field.
void validate(const TrainConfig& cfg);

/// Scale pair candidate `i` draws its stretching from.
ScalePair candidate_scale(const TrainConfig& cfg, std::size_t candidate);

struct Member {
  Partition partition;
  CellModel model;
};

/// Quantities computed once from the whole (scaled) training set and shared
/// by every member.
struct TrainContext {
  double scale_hat = 1.0;      // s_hat; grid partitions only
  double bin_width_hat = 1.0;  // h_hat = 1 / s_hat
  double clip_bound = 1.0;
};

TrainContext make_context(const Matrix& x_scaled, const Vector& y_scaled, const TrainConfig& cfg);

/// Bin width bounds (h_lower, h_upper) = (h_hat e^{-s_max}, h_hat e^{-s_min}).
std::pair<double, double> bin_width_bounds(const TrainContext& ctx, ScalePair pair);

struct MemberReport {
  std::size_t chosen_candidate = 0;
  std::vector<double> validation_mse;  // one per candidate when best-scored
};

/// Trains member `index` on already scaled data. Randomness comes only from
/// sub-seeds of (cfg.seed, index), so the member is the same whatever T is.
Member train_member(const Matrix& x, const Vector& y, const TrainConfig& cfg, std::size_t index,
                    const TrainContext& ctx, MemberReport* report = nullptr);

/// Fits the local model of an already built partition.
CellModel fit_cells(const Matrix& x, const Vector& y, std::span<const CellId> row_cells,
                    std::size_t n_cells, const TrainConfig& cfg, const TrainContext& ctx);

inline constexpr std::uint32_t kModelFormatVersion = 1;

struct EnsembleModel {
  std::uint32_t format_version = kModelFormatVersion;
  TrainConfig config;
  Standardizer standardizer;
  TrainContext context;
  std::vector<std::string> feature_names;
  std::string target_name;
  std::vector<Member> members;

  std::size_t dim() const { return standardizer.dim(); }
  std::size_t total_cells() const;
};

/// Members are trained in parallel over `threads` workers (0: OpenMP
/// default). The result does not depend on the thread count.
EnsembleModel train_ensemble(const Dataset& data, const TrainConfig& cfg, int threads = 0);

/// Reference implementation: one member after another on the calling thread.
EnsembleModel train_ensemble_serial(const Dataset& data, const TrainConfig& cfg);

/// Average of member predictions in original target units; rows in parallel.
Vector predict(const EnsembleModel& model, const Matrix& x, int threads = 0);
Vector predict_serial(const EnsembleModel& model, const Matrix& x);

/// members x rows matrix of individual member predictions (target units).
Eigen::MatrixXd predict_members(const EnsembleModel& model, const Matrix& x);

/// One member on already scaled input, in scaled target units.
double predict_member_scaled(const Member& member, Point z);

// --- theoretical parameter schedules ---

enum class SmoothnessClass { kC0, kC1, kCk };

struct Smoothness {
  SmoothnessClass kind = SmoothnessClass::kC0;
  double alpha = 1.0;  // in (0, 1]
  int k = 2;           // Ck only, k >= 2
};

struct Schedule {
  double lambda = 0.0;     // C0/C1: lambda_n; Ck: lambda_1
  double h_upper = 0.0;    // upper bin width
  std::optional<double> members;  // ensemble size (C1 only)
  std::optional<double> lambda2;  // Ck only
  std::optional<double> gamma;    // Ck only
  double delta = 0.0;
};

/// Evaluates the rate-optimal parameter sequences for n samples in d
/// dimensions. delta in [0, 1) is a user constant (asymptotically 0).
Schedule theoretical_schedule(double n, std::size_t d, const Smoothness& s, double delta = 0.0);

}  // namespace hte
