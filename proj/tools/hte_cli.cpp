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

// hte command line: train, predict, bench, study, schedule, inspect.
//
// Exit codes: 0 ok, 1 configuration or usage error, 2 data error,
// 3 training error. Diagnostics go to stderr as one line.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hte/config.hpp"
#include "hte/ensemble.hpp"
#include "hte/error.hpp"
#include "hte/evaluation.hpp"
#include "hte/serialize.hpp"

namespace {

using hte::Json;

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitTraining = 3;

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

int fail(int code, const std::string& msg) {
  std::cerr << "hte: error: " << one_line(msg) << '\n';
  return code;
}

int thread_count(const std::optional<int>& flag) {
  if (flag) {
    if (*flag < 0) throw hte::ConfigError("--threads must be >= 0");
    return *flag;
  }
  if (const char* env = std::getenv("HTE_THREADS")) {
    try {
      std::size_t used = 0;
      const int n = std::stoi(env, &used);
      if (used == std::string(env).size() && n >= 0) return n;
    } catch (const std::exception&) {
    }
    throw hte::ConfigError(std::string("HTE_THREADS must be a non-negative integer, got \"") + env + "\"");
  }
  return 0;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hte::ConfigError("cannot open config file " + path);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw hte::ConfigError("config file " + path + " is not valid JSON");
  if (!j.is_object()) throw hte::ConfigError("config file " + path + " must hold a JSON object");
  return j;
}

std::string opt_string(const Json& j, const std::string& key) {
  if (!j.contains(key)) return {};
  if (!j[key].is_string()) throw hte::ConfigError("invalid config field \"" + key + "\": expected a string");
  return j[key].get<std::string>();
}

std::optional<bool> opt_bool(const Json& j, const std::string& key) {
  if (!j.contains(key)) return std::nullopt;
  if (!j[key].is_boolean()) throw hte::ConfigError("invalid config field \"" + key + "\": expected true or false");
  return j[key].get<bool>();
}

void apply_overrides(hte::TrainConfig& cfg, const std::vector<std::string>& sets) {
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw hte::ConfigError("--set expects key=value, got \"" + kv + "\"");
    hte::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
}

// Common flags shared by the training-style subcommands.
struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool json = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_config) {
  if (with_config) cmd->add_option("--config", c.config_path, "JSON config file");
  cmd->add_option("--set", c.sets, "override a training key (key=value), repeatable");
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--threads", c.threads, "worker threads (default: HTE_THREADS or all cores)");
  cmd->add_flag("--json", c.json, "machine-readable output");
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  Common common;
  std::string data;
  std::string target;
  std::string model_out;
  bool no_header = false;
};

int cmd_train(const TrainArgs& a) {
  Json file = a.common.config_path.empty() ? Json::object() : read_json_file(a.common.config_path);
  hte::TrainConfig cfg = hte::config_from_json(file, {}, {"data", "target", "has_header", "model_out"});
  apply_overrides(cfg, a.common.sets);
  if (a.common.seed) cfg.seed = *a.common.seed;
  hte::validate(cfg);

  const std::string data = a.data.empty() ? opt_string(file, "data") : a.data;
  const std::string target = a.target.empty() ? opt_string(file, "target") : a.target;
  const std::string model_out = a.model_out.empty() ? opt_string(file, "model_out") : a.model_out;
  bool has_header = opt_bool(file, "has_header").value_or(true);
  if (a.no_header) has_header = false;
  if (data.empty()) throw hte::ConfigError("no training data: pass --data or set \"data\"");
  if (model_out.empty()) throw hte::ConfigError("no model output: pass --model-out or set \"model_out\"");

  const int threads = thread_count(a.common.threads);
  const hte::Dataset d = hte::load_csv(data, {target}, has_header);

  const auto t0 = std::chrono::steady_clock::now();
  const hte::EnsembleModel model = hte::train_ensemble(d, cfg, threads);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  hte::save_model(model_out, model);

  if (a.common.json) {
    Json s;
    s["T"] = cfg.members;
    s["mode"] = hte::to_string(cfg.mode);
    s["partition"] = hte::to_string(cfg.partition);
    s["n"] = d.size();
    s["d"] = d.dim();
    s["cells_total"] = model.total_cells();
    s["train_seconds"] = secs;
    s["model"] = model_out;
    std::cout << s.dump() << '\n';
  } else {
    std::cout << "trained T=" << cfg.members << " mode=" << hte::to_string(cfg.mode)
              << " partition=" << hte::to_string(cfg.partition) << " cells=" << model.total_cells()
              << " seconds=" << std::setprecision(4) << secs << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  std::string model;
  std::string data;
  std::string out;
  std::string target;
  bool no_header = false;
  std::optional<int> threads;
  bool json = false;
};

// Finds the target column among the loaded columns, if any.
std::optional<std::size_t> target_column(const hte::Dataset& all, const std::string& flag,
                                         const std::string& model_target, std::size_t d) {
  const auto& names = all.feature_names;
  if (!flag.empty()) {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == flag) return i;
    std::size_t used = 0;
    long idx = -1;
    try {
      idx = std::stol(flag, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != flag.size() || idx < 0 || static_cast<std::size_t>(idx) >= all.dim())
      throw hte::DataError("target column \"" + flag + "\" not found");
    return static_cast<std::size_t>(idx);
  }
  if (all.dim() == d + 1 && !model_target.empty()) {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == model_target) return i;
  }
  return std::nullopt;
}

int cmd_predict(const PredictArgs& a) {
  const int threads = thread_count(a.threads);
  const hte::EnsembleModel model = hte::load_model(a.model);
  const hte::Dataset all = hte::load_csv_features(a.data, !a.no_header);
  const std::size_t d = model.dim();
  const auto tcol = target_column(all, a.target, model.target_name, d);

  hte::Matrix x;
  std::optional<hte::Vector> y;
  if (tcol) {
    x.resize(all.x.rows(), all.x.cols() - 1);
    for (Eigen::Index c = 0, k = 0; c < all.x.cols(); ++c) {
      if (static_cast<std::size_t>(c) == *tcol) continue;
      x.col(k++) = all.x.col(c);
    }
    y = all.x.col(static_cast<Eigen::Index>(*tcol));
  } else {
    x = all.x;
  }
  if (static_cast<std::size_t>(x.cols()) != d) throw hte::DimensionMismatch(d, static_cast<std::size_t>(x.cols()));

  const hte::Vector pred = hte::predict(model, x, threads);

  std::ostringstream buf;
  buf << std::setprecision(17) << "prediction\n";
  for (Eigen::Index i = 0; i < pred.size(); ++i) buf << pred[i] << '\n';
  if (a.out.empty() || a.out == "-") {
    std::cout << buf.str();
  } else {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw hte::DataError("cannot write " + a.out);
    out << buf.str();
    if (!out) throw hte::DataError("write failed: " + a.out);
  }
  if (y) {
    const double m = hte::mse(pred, *y);
    std::ostream& os = (a.out.empty() || a.out == "-") ? std::cerr : std::cout;
    if (a.json)
      os << Json{{"rows", pred.size()}, {"mse", m}}.dump() << '\n';
    else
      os << "mse=" << std::setprecision(17) << m << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- bench / study

void emit_table(const std::vector<hte::StudyResult>& rows, const std::string& out, bool json) {
  std::ostringstream buf;
  if (json)
    buf << hte::study_to_json(rows).dump(2) << '\n';
  else
    hte::write_study_csv(buf, rows);
  if (out.empty() || out == "-") {
    std::cout << buf.str();
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw hte::DataError("cannot write " + out);
    f << buf.str();
  }
  for (const auto& r : rows)
    if (!r.error.empty()) std::cerr << "hte: warning: grid point failed: " << one_line(r.error) << '\n';
}

struct BenchArgs {
  Common common;
  std::string preset;
  std::optional<std::size_t> reps;
  std::string out;
  std::string data;
  std::string target;
  bool no_header = false;
  bool no_art = false;
};

int cmd_bench(const BenchArgs& a) {
  hte::StudyPreset p = hte::make_preset(a.preset);
  apply_overrides(p.base, a.common.sets);
  if (a.reps) p.options.repetitions = *a.reps;
  if (a.common.seed) p.options.seed = *a.common.seed;
  p.options.threads = thread_count(a.common.threads);
  if (a.no_art) p.options.measure_art = false;
  if (!a.data.empty()) p.data.dataset = hte::load_csv(a.data, {a.target}, !a.no_header);
  std::cerr << "hte: " << p.name << ": " << p.description << '\n';
  emit_table(hte::run_study(p.grid, p.base, p.data, p.options), a.out, a.common.json);
  return 0;
}

// Study config: training keys for the base model plus
//   grid: {name: [values...]}, generator, n_train, n_test, data, target,
//   has_header, train_fraction, reps, reps_per_dataset, measure_art, out.
int cmd_study(const BenchArgs& a) {
  if (a.common.config_path.empty()) throw hte::ConfigError("study needs --config");
  const Json file = read_json_file(a.common.config_path);
  const std::set<std::string> extra = {"grid", "generator", "n_train", "n_test", "data", "target",
                                       "has_header", "train_fraction", "reps", "reps_per_dataset",
                                       "measure_art", "out"};
  hte::TrainConfig base = hte::config_from_json(file, {}, extra);
  apply_overrides(base, a.common.sets);

  if (!file.contains("grid") || !file["grid"].is_object())
    throw hte::ConfigError("invalid config field \"grid\": expected an object of value lists");
  std::vector<std::pair<std::string, std::vector<double>>> axes;
  for (const auto& [name, values] : file["grid"].items()) {
    if (!values.is_array() || values.empty())
      throw hte::ConfigError("invalid config field \"grid." + name + "\": expected a non-empty array");
    std::vector<double> v;
    for (const auto& x : values) {
      if (!x.is_number()) throw hte::ConfigError("invalid config field \"grid." + name + "\": expected numbers");
      v.push_back(x.get<double>());
    }
    axes.emplace_back(name, std::move(v));
  }

  auto count = [&](const char* key, std::size_t dflt) -> std::size_t {
    if (!file.contains(key)) return dflt;
    const Json& v = file[key];
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
      throw hte::ConfigError(std::string("invalid config field \"") + key + "\": expected a positive integer");
    return v.get<std::size_t>();
  };

  hte::StudyData data;
  data.generator = opt_string(file, "generator");
  data.n_train = count("n_train", data.n_train);
  data.n_test = count("n_test", data.n_test);
  data.reps_per_dataset = count("reps_per_dataset", 1);
  if (file.contains("train_fraction")) {
    if (!file["train_fraction"].is_number())
      throw hte::ConfigError("invalid config field \"train_fraction\": expected a number");
    data.train_fraction = file["train_fraction"].get<double>();
  }
  const std::string path = a.data.empty() ? opt_string(file, "data") : a.data;
  if (!path.empty()) {
    const std::string target = a.target.empty() ? opt_string(file, "target") : a.target;
    const bool header = !a.no_header && opt_bool(file, "has_header").value_or(true);
    data.dataset = hte::load_csv(path, {target}, header);
  } else if (data.generator.empty()) {
    data.generator = "sin16";
  }

  hte::StudyOptions opts;
  opts.repetitions = a.reps ? *a.reps : count("reps", 1);
  opts.seed = a.common.seed ? *a.common.seed : base.seed;
  opts.threads = thread_count(a.common.threads);
  opts.measure_art = !a.no_art && opt_bool(file, "measure_art").value_or(true);

  const std::string out = a.out.empty() ? opt_string(file, "out") : a.out;
  emit_table(hte::run_study(hte::cartesian_grid(axes), base, data, opts), out, a.common.json);
  return 0;
}

// ---------------------------------------------------------------- schedule

struct ScheduleArgs {
  double n = 0.0;
  std::size_t d = 0;
  std::string cls;
  std::optional<double> alpha;
  std::optional<int> k;
  double delta = 0.0;
};

int cmd_schedule(const ScheduleArgs& a) {
  hte::Smoothness s;
  if (a.cls == "C0" || a.cls == "c0") {
    s.kind = hte::SmoothnessClass::kC0;
  } else if (a.cls == "C1" || a.cls == "c1") {
    s.kind = hte::SmoothnessClass::kC1;
  } else if (a.cls == "Ck" || a.cls == "ck") {
    s.kind = hte::SmoothnessClass::kCk;
    if (!a.k) throw hte::ConfigError("smoothness class Ck needs --k");
    s.k = *a.k;
  } else {
    throw hte::ConfigError("unknown smoothness class \"" + a.cls + "\" (expected C0, C1 or Ck)");
  }
  if (!a.alpha) throw hte::ConfigError("smoothness needs --alpha");
  s.alpha = *a.alpha;

  const hte::Schedule sch = hte::theoretical_schedule(a.n, a.d, s, a.delta);
  Json j;
  j["class"] = a.cls;
  j["n"] = a.n;
  j["d"] = a.d;
  j["alpha"] = s.alpha;
  if (s.kind == hte::SmoothnessClass::kCk) j["k"] = s.k;
  j["delta"] = a.delta;
  if (s.kind == hte::SmoothnessClass::kCk) {
    j["lambda1"] = sch.lambda;
    j["lambda2"] = *sch.lambda2;
    j["gamma"] = *sch.gamma;
  } else {
    j["lambda"] = sch.lambda;
  }
  j["h_upper"] = sch.h_upper;
  if (sch.members)
    j["T"] = *sch.members;
  else
    j["T"] = nullptr;
  std::cout << j.dump() << '\n';
  return 0;
}

// ---------------------------------------------------------------- inspect

struct InspectArgs {
  std::string model;
  std::string config_out;
  bool json = false;
};

int cmd_inspect(const InspectArgs& a) {
  const hte::EnsembleModel m = hte::load_model(a.model);
  std::vector<std::size_t> cells;
  for (const auto& mem : m.members) cells.push_back(hte::n_cells(mem.model));

  Json j;
  j["format_version"] = m.format_version;
  j["d"] = m.dim();
  j["T"] = m.members.size();
  j["mode"] = hte::to_string(m.config.mode);
  j["partition"] = hte::to_string(m.config.partition);
  j["cells_total"] = m.total_cells();
  j["cells_per_member"] = cells;
  j["target"] = m.target_name;
  j["features"] = m.feature_names;
  j["scale_hat"] = m.context.scale_hat;
  j["bin_width_hat"] = m.context.bin_width_hat;
  j["clip_bound"] = m.context.clip_bound;
  j["config"] = hte::config_to_json(m.config);

  if (!a.config_out.empty()) {
    std::ofstream f(a.config_out, std::ios::binary);
    if (!f) throw hte::DataError("cannot write " + a.config_out);
    f << hte::config_to_json(m.config).dump(2) << '\n';
  }
  if (a.json) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "format " << m.format_version << ", d=" << m.dim() << ", T=" << m.members.size()
              << ", mode=" << hte::to_string(m.config.mode) << ", partition=" << hte::to_string(m.config.partition)
              << ", cells=" << m.total_cells() << ", seed=" << m.config.seed << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hte: randomized rotated-grid regression ensembles"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hte 1.0.0");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "train an ensemble and write a model file");
  add_common(c_train, train.common, true);
  c_train->add_option("--data", train.data, "training CSV");
  c_train->add_option("--target", train.target, "target column name or index (default: last)");
  c_train->add_option("--model-out,-o", train.model_out, "model file to write");
  c_train->add_flag("--no-header", train.no_header, "CSV has no header row");

  PredictArgs pred;
  auto* c_pred = app.add_subcommand("predict", "predict a CSV with a saved model");
  c_pred->add_option("--model,-m", pred.model, "model file")->required();
  c_pred->add_option("--data", pred.data, "feature CSV")->required();
  c_pred->add_option("--out,-o", pred.out, "prediction CSV (default: stdout)");
  c_pred->add_option("--target", pred.target, "target column to score against");
  c_pred->add_flag("--no-header", pred.no_header, "CSV has no header row");
  c_pred->add_option("--threads", pred.threads, "worker threads");
  c_pred->add_flag("--json", pred.json, "machine-readable summary");

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "run a built-in study preset");
  add_common(c_bench, bench.common, false);
  c_bench->add_option("preset", bench.preset, "sin16 | counter3d | scale-study | scale-study-fig | t-study")
      ->required();
  c_bench->add_option("--reps", bench.reps, "repetitions per grid point");
  c_bench->add_option("--out,-o", bench.out, "table output (default: stdout)");
  c_bench->add_option("--data", bench.data, "CSV to split per repetition instead of synthetic data");
  c_bench->add_option("--target", bench.target, "target column for --data");
  c_bench->add_flag("--no-header", bench.no_header, "CSV has no header row");
  c_bench->add_flag("--no-art", bench.no_art, "skip timing; repetitions may run concurrently");

  BenchArgs study;
  auto* c_study = app.add_subcommand("study", "run a parameter grid study from a JSON config");
  add_common(c_study, study.common, true);
  c_study->add_option("--reps", study.reps, "repetitions per grid point");
  c_study->add_option("--out,-o", study.out, "table output (default: stdout)");
  c_study->add_option("--data", study.data, "CSV to split per repetition");
  c_study->add_option("--target", study.target, "target column for --data");
  c_study->add_flag("--no-header", study.no_header, "CSV has no header row");
  c_study->add_flag("--no-art", study.no_art, "skip timing; repetitions may run concurrently");

  ScheduleArgs sched;
  auto* c_sched = app.add_subcommand("schedule", "print the theoretical (lambda, h_upper, T) schedule");
  c_sched->add_option("--n", sched.n, "sample size")->required()->check(CLI::PositiveNumber);
  c_sched->add_option("--d", sched.d, "input dimension")->required()->check(CLI::PositiveNumber);
  c_sched->add_option("--class", sched.cls, "C0 | C1 | Ck")->required();
  c_sched->add_option("--alpha", sched.alpha, "Hoelder exponent in (0, 1]");
  c_sched->add_option("--k", sched.k, "order for Ck (k >= 2)");
  c_sched->add_option("--delta", sched.delta, "small constant in [0, 1)");

  InspectArgs insp;
  auto* c_insp = app.add_subcommand("inspect", "print model metadata");
  c_insp->add_option("model", insp.model, "model file")->required();
  c_insp->add_option("--config-out", insp.config_out, "write the embedded training config");
  c_insp->add_flag("--json", insp.json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kExitConfig, e.what());
  }

  try {
    if (*c_train) return cmd_train(train);
    if (*c_pred) return cmd_predict(pred);
    if (*c_bench) return cmd_bench(bench);
    if (*c_study) return cmd_study(study);
    if (*c_sched) return cmd_schedule(sched);
    if (*c_insp) return cmd_inspect(insp);
  } catch (const hte::ConfigError& e) {
    return fail(kExitConfig, e.what());
  } catch (const hte::DataError& e) {
    return fail(kExitData, e.what());
  } catch (const hte::FormatError& e) {
    return fail(kExitData, e.what());
  } catch (const hte::TrainingError& e) {
    return fail(kExitTraining, e.what());
  } catch (const std::exception& e) {
    return fail(kExitTraining, e.what());
  }
  return kExitConfig;
}
