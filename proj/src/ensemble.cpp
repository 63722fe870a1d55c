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

#include "hte/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "hte/error.hpp"
#include "hte/parallel.hpp"
#include "hte/rng.hpp"

namespace hte {

std::string to_string(Mode mode) { return mode == Mode::kNht ? "nht" : "kht"; }

std::string to_string(PartitionKind kind) {
  return kind == PartitionKind::kGrid ? "grid" : "adaptive";
}

Mode mode_from_string(const std::string& name) {
  if (name == "nht") return Mode::kNht;
  if (name == "kht") return Mode::kKht;
  throw ConfigError("mode must be \"nht\" or \"kht\", got \"" + name + "\"");
}

PartitionKind partition_from_string(const std::string& name) {
  if (name == "grid") return PartitionKind::kGrid;
  if (name == "adaptive") return PartitionKind::kAdaptive;
  throw ConfigError("partition must be \"grid\" or \"adaptive\", got \"" + name + "\"");
}

std::vector<ScalePair> default_candidate_scales() {
  return {{-1.0, 1.0}, {0.0, 2.0}, {1.0, 3.0}, {2.0, 4.0}, {3.0, 5.0}};
}

void validate(const TrainConfig& cfg) {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("invalid config field \"" + field + "\": " + why);
  };
  if (cfg.members < 1) fail("T", "must be at least 1");
  if (cfg.candidates < 1) fail("candidates", "must be at least 1");
  if (!std::isfinite(cfg.s_min) || !std::isfinite(cfg.s_max) || !(cfg.s_min < cfg.s_max))
    fail("s_min", "need finite s_min < s_max");
  if (cfg.candidates > 1) {
    if (cfg.partition != PartitionKind::kGrid)
      fail("candidates", "best-scored selection varies stretching and needs the grid partition");
    if (!(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0))
      fail("validation_fraction", "must be in (0, 1) when candidates > 1");
    if (cfg.candidate_scales.empty()) fail("candidate_scales", "must not be empty");
    for (const auto& p : cfg.candidate_scales)
      if (!std::isfinite(p.s_min) || !std::isfinite(p.s_max) || !(p.s_min < p.s_max))
        fail("candidate_scales", "every pair needs finite s_min < s_max");
  }
  if (cfg.min_leaf < 1) fail("m", "must be at least 1");
  if (cfg.mode == Mode::kKht) {
    if (!(cfg.gamma > 0.0) || !std::isfinite(cfg.gamma)) fail("gamma", "must be positive");
    if (!(cfg.lambda2 > 0.0) || !std::isfinite(cfg.lambda2)) fail("lambda2", "must be positive");
  }
  if (cfg.clip_bound && !(*cfg.clip_bound > 0.0)) fail("clip", "must be positive");
  if (!(cfg.lambda1 >= 0.0)) fail("lambda1", "must be non-negative");
  if (!std::isfinite(cfg.q)) fail("q", "must be finite");
}

ScalePair candidate_scale(const TrainConfig& cfg, std::size_t candidate) {
  if (cfg.candidates <= 1) return {cfg.s_min, cfg.s_max};
  return cfg.candidate_scales[candidate % cfg.candidate_scales.size()];
}

TrainContext make_context(const Matrix& x_scaled, const Vector& y_scaled, const TrainConfig& cfg) {
  TrainContext ctx;
  if (cfg.partition == PartitionKind::kGrid) {
    const DefaultScale ds = default_scale(x_scaled);
    ctx.scale_hat = ds.scale;
    ctx.bin_width_hat = ds.bin_width;
  }
  if (cfg.clip_bound) {
    ctx.clip_bound = *cfg.clip_bound;
  } else {
    const double m = y_scaled.size() > 0 ? y_scaled.cwiseAbs().maxCoeff() : 0.0;
    ctx.clip_bound = m > 0.0 ? m : 1.0;
  }
  return ctx;
}

std::pair<double, double> bin_width_bounds(const TrainContext& ctx, ScalePair pair) {
  return {ctx.bin_width_hat * std::exp(-pair.s_max), ctx.bin_width_hat * std::exp(-pair.s_min)};
}

CellModel fit_cells(const Matrix& x, const Vector& y, std::span<const CellId> row_cells,
                    std::size_t n_cells, const TrainConfig& cfg, const TrainContext& ctx) {
  if (cfg.mode == Mode::kNht) return fit_constant(row_cells, y, n_cells, cfg.fallback);
  KernelFitOptions opts;
  opts.gamma = cfg.gamma;
  opts.lambda2 = cfg.lambda2;
  opts.clip_bound = ctx.clip_bound;
  opts.small_cell = cfg.small_cell;
  opts.fallback = cfg.fallback;
  return fit_kernel_cells(x, y, row_cells, n_cells, opts);
}

namespace {

// Sub-seed paths below (cfg.seed, member): 0 rotation, 1 + i candidate i,
// kValidationStream the member's validation split.
constexpr std::uint64_t kValidationStream = 0xffffffffULL;

Member fit_grid_candidate(const Matrix& x, const Vector& y, HistogramTransform transform,
                          const TrainConfig& cfg, const TrainContext& ctx) {
  GridBuild built = build_grid(std::move(transform), x);
  const std::size_t cells = built.partition.n_cells();
  CellModel model = fit_cells(x, y, built.row_cells, cells, cfg, ctx);
  return {std::move(built.partition), std::move(model)};
}

double score(const Member& m, const Matrix& x, const Vector& y) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double r = y[i] - predict_member_scaled(m, row(x, i));
    acc += r * r;
  }
  return acc / static_cast<double>(x.rows());
}

}  // namespace

Member train_member(const Matrix& x, const Vector& y, const TrainConfig& cfg, std::size_t index,
                    const TrainContext& ctx, MemberReport* report) {
  const auto d = static_cast<std::size_t>(x.cols());
  Rng rotation_rng(derive_seed(cfg.seed, {index, 0}));
  Eigen::MatrixXd rotation = sample_rotation(d, rotation_rng);

  if (cfg.partition == PartitionKind::kAdaptive) {
    AdaptiveBuild built = build_adaptive(rotation, x, cfg.min_leaf);
    const std::size_t cells = built.tree.n_cells();
    CellModel model = fit_cells(x, y, built.row_cells, cells, cfg, ctx);
    if (report) *report = {};
    return {std::move(built.tree), std::move(model)};
  }

  auto candidate_transform = [&](std::size_t c) {
    Rng rng(derive_seed(cfg.seed, {index, 1 + c}));
    const auto [h_lo, h_hi] = bin_width_bounds(ctx, candidate_scale(cfg, c));
    return sample_stretch_and_shift(rotation, h_lo, h_hi, rng);
  };

  if (cfg.candidates == 1) {
    if (report) *report = {};
    return fit_grid_candidate(x, y, candidate_transform(0), cfg, ctx);
  }

  // Best-scored: candidates share the rotation, are fitted on the member's
  // training part and compete on its validation part.
  const auto n = static_cast<std::size_t>(x.rows());
  const std::size_t n_fit = train_size(n, 1.0 - cfg.validation_fraction);
  if (n_fit == 0 || n_fit >= n)
    throw TrainingError("member " + std::to_string(index) + ": validation split of " +
                        std::to_string(n) + " rows leaves an empty side");
  const auto order = shuffled_rows(n, derive_seed(cfg.seed, {index, kValidationStream}));
  Matrix x_fit(static_cast<Eigen::Index>(n_fit), x.cols());
  Vector y_fit(static_cast<Eigen::Index>(n_fit));
  Matrix x_val(static_cast<Eigen::Index>(n - n_fit), x.cols());
  Vector y_val(static_cast<Eigen::Index>(n - n_fit));
  for (std::size_t k = 0; k < n; ++k) {
    const auto src = static_cast<Eigen::Index>(order[k]);
    if (k < n_fit) {
      x_fit.row(static_cast<Eigen::Index>(k)) = x.row(src);
      y_fit[static_cast<Eigen::Index>(k)] = y[src];
    } else {
      x_val.row(static_cast<Eigen::Index>(k - n_fit)) = x.row(src);
      y_val[static_cast<Eigen::Index>(k - n_fit)] = y[src];
    }
  }

  std::vector<std::optional<Member>> fitted(cfg.candidates);
  std::vector<double> mse(cfg.candidates, 0.0);
  std::vector<std::exception_ptr> errors(cfg.candidates);
  const auto count = static_cast<std::int64_t>(cfg.candidates);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t c = 0; c < count; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    try {
      fitted[ci] = fit_grid_candidate(x_fit, y_fit, candidate_transform(ci), cfg, ctx);
      mse[ci] = score(*fitted[ci], x_val, y_val);
    } catch (...) {
      errors[ci] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::size_t best = 0;
  for (std::size_t c = 1; c < cfg.candidates; ++c)
    if (mse[c] < mse[best]) best = c;
  if (report) *report = {best, mse};
  return std::move(*fitted[best]);
}

std::size_t EnsembleModel::total_cells() const {
  std::size_t total = 0;
  for (const auto& m : members) total += n_cells(m.partition);
  return total;
}

namespace {

struct Prepared {
  EnsembleModel model;
  Matrix x;
  Vector y;
};

Prepared prepare(const Dataset& data, const TrainConfig& cfg) {
  validate(cfg);
  validate(data);
  Prepared p;
  p.model.config = cfg;
  p.model.standardizer = fit_standardizer(data, cfg.standardize_features, cfg.standardize_target);
  p.model.feature_names = data.feature_names;
  p.model.target_name = data.target_name;
  p.x = p.model.standardizer.apply(data.x);
  p.y = p.model.standardizer.apply_target(data.y);
  p.model.context = make_context(p.x, p.y, cfg);
  return p;
}

}  // namespace

EnsembleModel train_ensemble(const Dataset& data, const TrainConfig& cfg, int threads) {
  Prepared p = prepare(data, cfg);
  const std::size_t count = cfg.members;
  std::vector<std::optional<Member>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<std::int64_t>(count);
  const ThreadLimit limit(threads);

  // With a single member the inner loops (candidates, cells) get the threads.
#pragma omp parallel for schedule(dynamic, 1) if (count > 1)
  for (std::int64_t t = 0; t < n; ++t) {
    try {
      slots[static_cast<std::size_t>(t)] =
          train_member(p.x, p.y, cfg, static_cast<std::size_t>(t), p.model.context);
    } catch (...) {
      errors[static_cast<std::size_t>(t)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  p.model.members.reserve(count);
  for (auto& s : slots) p.model.members.push_back(std::move(*s));
  return std::move(p.model);
}

EnsembleModel train_ensemble_serial(const Dataset& data, const TrainConfig& cfg) {
  Prepared p = prepare(data, cfg);
  p.model.members.reserve(cfg.members);
  for (std::size_t t = 0; t < cfg.members; ++t)
    p.model.members.push_back(train_member(p.x, p.y, cfg, t, p.model.context));
  return std::move(p.model);
}

double predict_member_scaled(const Member& member, Point z) {
  return predict_cell(member.model, assign(member.partition, z), z);
}

namespace {

double predict_row(const EnsembleModel& model, Point x, std::span<double> z) {
  model.standardizer.apply_row(x, z);
  double sum = 0.0;
  for (const auto& m : model.members) sum += predict_member_scaled(m, z);
  return model.standardizer.invert_target(sum / static_cast<double>(model.members.size()));
}

void check_model(const EnsembleModel& model, const Matrix& x) {
  if (model.members.empty()) throw FormatError("model has no members");
  if (static_cast<std::size_t>(x.cols()) != model.dim())
    throw DimensionMismatch(model.dim(), static_cast<std::size_t>(x.cols()));
}

}  // namespace

Vector predict(const EnsembleModel& model, const Matrix& x, int threads) {
  check_model(model, x);
  Vector out(x.rows());
  const auto n = static_cast<std::int64_t>(x.rows());
  const ThreadLimit limit(threads);
#pragma omp parallel
  {
    std::vector<double> z(model.dim());
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) out[i] = predict_row(model, row(x, i), z);
  }
  return out;
}

Vector predict_serial(const EnsembleModel& model, const Matrix& x) {
  check_model(model, x);
  Vector out(x.rows());
  std::vector<double> z(model.dim());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = predict_row(model, row(x, i), z);
  return out;
}

Eigen::MatrixXd predict_members(const EnsembleModel& model, const Matrix& x) {
  check_model(model, x);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(model.members.size()), x.rows());
  std::vector<double> z(model.dim());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    model.standardizer.apply_row(row(x, i), z);
    for (std::size_t t = 0; t < model.members.size(); ++t)
      out(static_cast<Eigen::Index>(t), i) =
          model.standardizer.invert_target(predict_member_scaled(model.members[t], z));
  }
  return out;
}

// --- schedules ---

Schedule theoretical_schedule(double n, std::size_t d, const Smoothness& s, double delta) {
  if (!(n >= 2.0) || !std::isfinite(n)) throw ConfigError("schedule needs n >= 2");
  if (d < 1) throw ConfigError("schedule needs d >= 1");
  if (!(s.alpha > 0.0 && s.alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (!(delta >= 0.0 && delta < 1.0)) throw ConfigError("delta must lie in [0, 1)");
  const double dd = static_cast<double>(d);
  const double a = s.alpha;
  Schedule out;
  out.delta = delta;
  switch (s.kind) {
    case SmoothnessClass::kC0: {
      const double denom = 2.0 * a * (1.0 + delta) + dd;
      out.lambda = std::pow(n, -2.0 * (a + dd) / denom);
      out.h_upper = std::pow(n, -1.0 / denom);
      break;
    }
    case SmoothnessClass::kC1: {
      const double denom = 2.0 * (1.0 + a) * (2.0 - delta) + dd;
      out.lambda = std::pow(n, -1.0 / (2.0 * (1.0 + a) + 2.0 * dd));
      out.h_upper = std::pow(n, -1.0 / denom);
      out.members = std::pow(n, 2.0 * a / denom);
      break;
    }
    case SmoothnessClass::kCk: {
      if (s.k < 2) throw ConfigError("Ck schedules need k >= 2");
      const double denom = 2.0 * (static_cast<double>(s.k) + a) + dd;
      out.lambda = std::pow(n, -1.0 / denom);
      out.lambda2 = 1.0 / n;
      out.gamma = std::pow(n, -1.0 / denom);
      out.h_upper = 1.0;
      break;
    }
  }
  return out;
}

}  // namespace hte
