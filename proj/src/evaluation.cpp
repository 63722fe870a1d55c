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

#include "hte/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

#include "hte/error.hpp"
#include "hte/rng.hpp"

namespace hte {

double mse(const Vector& pred, const Vector& y) {
  if (pred.size() != y.size())
    throw DataError("mse: prediction length " + std::to_string(pred.size()) +
                    " differs from target length " + std::to_string(y.size()));
  if (y.size() == 0) throw DataError("mse: empty input");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double r = y[i] - pred[i];
    acc += r * r;
  }
  return acc / static_cast<double>(y.size());
}

double art(std::span<const double> seconds) {
  if (seconds.empty()) throw DataError("art: no timings");
  return std::accumulate(seconds.begin(), seconds.end(), 0.0) / static_cast<double>(seconds.size());
}

double coefficient_of_variation(std::span<const double> seconds) {
  const double mean = art(seconds);
  if (seconds.size() < 2 || mean == 0.0) return 0.0;
  double ss = 0.0;
  for (double s : seconds) ss += (s - mean) * (s - mean);
  return std::sqrt(ss / static_cast<double>(seconds.size() - 1)) / mean;
}

Line convergence_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw DataError("convergence slope needs at least 2 points");
  double sx = 0.0, sy = 0.0;
  for (const auto& [n, e] : points) {
    if (!(n > 0.0) || !(e > 0.0)) throw DataError("convergence slope needs positive n and mse");
    sx += std::log(n);
    sy += std::log(e);
  }
  const double k = static_cast<double>(points.size());
  const double mx = sx / k, my = sy / k;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [n, e] : points) {
    const double dx = std::log(n) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(e) - my);
  }
  if (!(sxx > 0.0)) throw DataError("convergence slope needs at least 2 distinct n");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

std::vector<GridPoint> cartesian_grid(
    const std::vector<std::pair<std::string, std::vector<double>>>& axes) {
  std::vector<GridPoint> grid(1);
  for (const auto& [name, values] : axes) {
    std::vector<GridPoint> next;
    for (const auto& g : grid) {
      for (double v : values) {
        GridPoint p = g;
        p.params.emplace_back(name, v);
        next.push_back(std::move(p));
      }
    }
    grid = std::move(next);
  }
  return grid;
}

RepetitionSeeds repetition_seeds(std::uint64_t seed, std::size_t rep, std::size_t reps_per_dataset) {
  const std::uint64_t set = rep / std::max<std::size_t>(1, reps_per_dataset);
  return {derive_seed(seed, {1, set}), derive_seed(seed, {2, set}), derive_seed(seed, {4, set}),
          derive_seed(seed, {3, rep})};
}

namespace {

struct RunSetup {
  TrainConfig cfg;
  StudyData data;
};

RunSetup apply_point(const GridPoint& p, const TrainConfig& base, const StudyData& data) {
  RunSetup s{base, data};
  for (const auto& [name, value] : p.params) {
    if (name == "n") {
      if (!(value >= 1.0)) throw ConfigError("grid parameter n must be >= 1");
      s.data.n_train = static_cast<std::size_t>(value);
    } else if (name == "n_test") {
      if (!(value >= 1.0)) throw ConfigError("grid parameter n_test must be >= 1");
      s.data.n_test = static_cast<std::size_t>(value);
    } else {
      Json j;
      j[name] = value;
      s.cfg = config_from_json(j, s.cfg);
    }
  }
  return s;
}

struct RunOutcome {
  double mse = 0.0;
  double train_s = 0.0;
  double predict_s = 0.0;
};

RunOutcome run_once(const RunSetup& s, std::size_t rep, const StudyOptions& opts) {
  const RepetitionSeeds seeds = repetition_seeds(opts.seed, rep, s.data.reps_per_dataset);
  Dataset train, test;
  if (s.data.dataset) {
    Split parts = split(*s.data.dataset, s.data.train_fraction, seeds.split);
    train = std::move(parts.train);
    test = std::move(parts.test);
  } else {
    train = generate(s.data.generator, s.data.n_train, seeds.train_data);
    test = generate(s.data.generator, s.data.n_test, seeds.test_data);
  }
  TrainConfig cfg = s.cfg;
  cfg.seed = seeds.model;

  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  const EnsembleModel model = train_ensemble(train, cfg, opts.threads);
  const auto t1 = Clock::now();
  const Vector pred = predict(model, test.x, opts.threads);
  const auto t2 = Clock::now();
  return {mse(pred, test.y), std::chrono::duration<double>(t1 - t0).count(),
          std::chrono::duration<double>(t2 - t1).count()};
}

}  // namespace

std::vector<StudyResult> run_study(const std::vector<GridPoint>& grid, const TrainConfig& base,
                                   const StudyData& data, const StudyOptions& opts) {
  if (opts.repetitions < 1) throw ConfigError("study needs at least 1 repetition");
  if (!data.dataset && data.generator.empty()) throw ConfigError("study needs a generator or a dataset");
  std::vector<StudyResult> results;
  results.reserve(grid.size());
  for (const auto& point : grid) {
    StudyResult res;
    res.point = point;
    RunSetup setup;
    try {
      setup = apply_point(point, base, data);
      validate(setup.cfg);
    } catch (const std::exception& e) {
      res.error = e.what();
      res.mse_mean = res.mse_std = std::numeric_limits<double>::quiet_NaN();
      results.push_back(std::move(res));
      continue;
    }

    const std::size_t reps = opts.repetitions;
    std::vector<std::optional<RunOutcome>> outcomes(reps);
    std::vector<std::string> errors(reps);
    const auto count = static_cast<std::int64_t>(reps);
    StudyOptions inner = opts;
    if (!opts.measure_art) inner.threads = 1;
#pragma omp parallel for schedule(dynamic, 1) if (!opts.measure_art)
    for (std::int64_t r = 0; r < count; ++r) {
      const auto ri = static_cast<std::size_t>(r);
      try {
        outcomes[ri] = run_once(setup, ri, inner);
      } catch (const std::exception& e) {
        errors[ri] = e.what();
      }
    }

    std::vector<double> train_times, predict_times;
    for (std::size_t r = 0; r < reps; ++r) {
      if (!outcomes[r]) {
        if (res.error.empty()) res.error = errors[r];
        continue;
      }
      res.mse_runs.push_back(outcomes[r]->mse);
      train_times.push_back(outcomes[r]->train_s);
      predict_times.push_back(outcomes[r]->predict_s);
    }
    res.repetitions = res.mse_runs.size();
    if (res.repetitions == 0) {
      res.mse_mean = res.mse_std = std::numeric_limits<double>::quiet_NaN();
    } else {
      res.mse_mean = std::accumulate(res.mse_runs.begin(), res.mse_runs.end(), 0.0) /
                     static_cast<double>(res.repetitions);
      double ss = 0.0;
      for (double m : res.mse_runs) ss += (m - res.mse_mean) * (m - res.mse_mean);
      res.mse_std = res.repetitions > 1 ? std::sqrt(ss / static_cast<double>(res.repetitions - 1)) : 0.0;
      res.art_mean_s = art(train_times);
      res.predict_time_s = art(predict_times);
    }
    results.push_back(std::move(res));
  }
  return results;
}

namespace {

std::vector<std::string> param_columns(const std::vector<StudyResult>& results) {
  std::vector<std::string> names;
  for (const auto& r : results)
    for (const auto& [name, v] : r.point.params)
      if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
  return names;
}

std::optional<double> param_value(const GridPoint& p, const std::string& name) {
  for (const auto& [n, v] : p.params)
    if (n == name) return v;
  return std::nullopt;
}

}  // namespace

void write_study_csv(std::ostream& out, const std::vector<StudyResult>& results) {
  const auto names = param_columns(results);
  for (const auto& n : names) out << "param." << n << ',';
  out << "reps,mse_mean,mse_std,art_mean_s,predict_time_s\n";
  out << std::setprecision(12);
  for (const auto& r : results) {
    for (const auto& n : names) {
      if (const auto v = param_value(r.point, n)) out << *v;
      out << ',';
    }
    out << r.repetitions << ',' << r.mse_mean << ',' << r.mse_std << ',' << r.art_mean_s << ','
        << r.predict_time_s << '\n';
  }
}

Json study_to_json(const std::vector<StudyResult>& results) {
  Json rows = Json::array();
  const auto names = param_columns(results);
  for (const auto& r : results) {
    Json row;
    for (const auto& n : names) {
      if (const auto v = param_value(r.point, n))
        row["param." + n] = *v;
      else
        row["param." + n] = nullptr;
    }
    row["reps"] = r.repetitions;
    auto num = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
    row["mse_mean"] = num(r.mse_mean);
    row["mse_std"] = num(r.mse_std);
    row["art_mean_s"] = num(r.art_mean_s);
    row["predict_time_s"] = num(r.predict_time_s);
    if (!r.error.empty()) row["error"] = r.error;
    rows.push_back(std::move(row));
  }
  return rows;
}

// --- presets ---

std::vector<std::string> preset_names() {
  return {"sin16", "counter3d", "scale-study", "scale-study-fig", "t-study"};
}

namespace {

TrainConfig nht_grid_base() {
  TrainConfig cfg;
  cfg.mode = Mode::kNht;
  cfg.partition = PartitionKind::kGrid;
  cfg.s_min = 0.0;
  cfg.s_max = 1.0;
  cfg.fallback = FallbackRule::kGlobalMean;
  return cfg;
}

std::vector<GridPoint> scale_pair_grid(const std::vector<ScalePair>& pairs) {
  std::vector<GridPoint> grid;
  for (const auto& p : pairs) grid.push_back({{{"s_min", p.s_min}, {"s_max", p.s_max}}});
  return grid;
}

}  // namespace

StudyPreset make_preset(const std::string& name) {
  StudyPreset p;
  p.name = name;
  if (name == "sin16") {
    p.description = "NHTE on sin(16x): MSE against T for n in {2000..5000}, 2000 test points";
    p.base = nht_grid_base();
    p.data.generator = "sin16";
    p.data.n_test = 2000;
    p.grid = cartesian_grid({{"n", {2000, 3000, 4000, 5000}}, {"T", {1, 2, 5, 10, 20}}});
    p.options.repetitions = 10;
  } else if (name == "counter3d") {
    p.description = "NHTE on the 3-d counterexample: MSE against T and n, 1000 test points";
    p.base = nht_grid_base();
    p.data.generator = "counter3d";
    p.data.n_test = 1000;
    p.grid = cartesian_grid({{"n", {1000, 2000, 4000, 8000}}, {"T", {1, 2, 5, 10, 30}}});
    p.options.repetitions = 30;
  } else if (name == "scale-study") {
    p.description = "NHTE on sin(16x): MSE over 5 (s_min, s_max) pairs, 10 datasets x 10 runs";
    p.base = nht_grid_base();
    p.base.members = 10;
    p.data.generator = "sin16";
    p.data.n_train = 500;
    p.data.n_test = 1000;
    p.data.reps_per_dataset = 10;
    p.grid = scale_pair_grid(default_candidate_scales());
    p.options.repetitions = 100;
  } else if (name == "scale-study-fig") {
    p.description = "NHTE on sin(16x): single runs at (0,2), (1,3), (2,4), n=500, 1000 test points";
    p.base = nht_grid_base();
    p.base.members = 10;
    p.data.generator = "sin16";
    p.data.n_train = 500;
    p.data.n_test = 1000;
    p.grid = scale_pair_grid({{0.0, 2.0}, {1.0, 3.0}, {2.0, 4.0}});
    p.options.repetitions = 1;
  } else if (name == "t-study") {
    p.description = "adaptive KHTE: MSE/ART over T x m on a 9-feature tabular dataset";
    p.base.mode = Mode::kKht;
    p.base.partition = PartitionKind::kAdaptive;
    p.base.fallback = FallbackRule::kGlobalMean;
    p.data.generator = "friedman9";
    p.data.n_train = 10000;
    p.data.n_test = 3000;
    p.grid = cartesian_grid({{"T", {1, 2, 5, 10}}, {"m", {200, 400, 1000, 1500, 2000}}});
    p.options.repetitions = 3;
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset \"" + name + "\" (known: " + known + ")");
  }
  return p;
}

}  // namespace hte
