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
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hte/config.hpp"
#include "hte/ensemble.hpp"

namespace hte {

/// Mean squared residual. Throws DataError on length mismatch or empty input.
double mse(const Vector& pred, const Vector& y);

/// Arithmetic mean of wall-clock training times.
double art(std::span<const double> seconds);

/// Sample coefficient of variation (std / mean) of the times.
double coefficient_of_variation(std::span<const double> seconds);

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
};

/// OLS fit of log(mse) on log(n). Needs two distinct n and positive mse.
Line convergence_slope(std::span<const std::pair<double, double>> points);

// --- parameter studies ---

/// One grid point: named parameters applied on top of the base config.
/// Recognized names: any numeric training key (T, s_min, s_max, m, gamma,
/// lambda2, candidates, ...) plus "n" (training size) and "n_test".
struct GridPoint {
  std::vector<std::pair<std::string, double>> params;
};

/// Cartesian product of named value lists, first name varying slowest.
std::vector<GridPoint> cartesian_grid(const std::vector<std::pair<std::string, std::vector<double>>>& axes);

/// Where each repetition's data comes from.
struct StudyData {
  std::string generator;         // synthetic source; empty when `dataset` is used
  std::size_t n_train = 500;
  std::size_t n_test = 1000;
  std::optional<Dataset> dataset;  // real data, split per repetition
  double train_fraction = 0.7;
  std::size_t reps_per_dataset = 1;  // repetitions sharing one generated dataset
};

struct StudyOptions {
  std::size_t repetitions = 1;
  std::uint64_t seed = 0;
  bool measure_art = true;  // repetitions run one at a time when true
  int threads = 0;
};

struct StudyResult {
  GridPoint point;
  std::size_t repetitions = 0;  // successful runs
  double mse_mean = 0.0;
  double mse_std = 0.0;
  double art_mean_s = 0.0;
  double predict_time_s = 0.0;
  std::vector<double> mse_runs;  // per repetition, in repetition order
  std::string error;             // first failure, if any
};

/// Seeds used by repetition `rep`. Data seeds are shared by groups of
/// `reps_per_dataset` consecutive repetitions; the model seed is per repetition.
struct RepetitionSeeds {
  std::uint64_t train_data;
  std::uint64_t test_data;
  std::uint64_t split;
  std::uint64_t model;
};
RepetitionSeeds repetition_seeds(std::uint64_t seed, std::size_t rep, std::size_t reps_per_dataset);

/// Trains and evaluates every grid point `repetitions` times. Repetition r
/// uses the same data and model seeds at every grid point, so rows can be
/// compared pairwise. Failures are recorded per point; the study goes on.
std::vector<StudyResult> run_study(const std::vector<GridPoint>& grid, const TrainConfig& base,
                                   const StudyData& data, const StudyOptions& opts);

/// Header: param.<name>..., reps, mse_mean, mse_std, art_mean_s, predict_time_s.
void write_study_csv(std::ostream& out, const std::vector<StudyResult>& results);
Json study_to_json(const std::vector<StudyResult>& results);

// --- presets ---

struct StudyPreset {
  std::string name;
  std::string description;
  std::vector<GridPoint> grid;
  TrainConfig base;
  StudyData data;
  StudyOptions options;
};

/// sin16, counter3d, scale-study, scale-study-fig, t-study.
std::vector<std::string> preset_names();
StudyPreset make_preset(const std::string& name);

}  // namespace hte
