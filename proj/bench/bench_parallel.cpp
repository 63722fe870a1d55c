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

// Parallel kernels against their serial references.
// Arg(0) is the serial path; Arg(k) runs the parallel path on k threads.

#include <benchmark/benchmark.h>

#include "hte/data.hpp"
#include "hte/ensemble.hpp"
#include "hte/parallel.hpp"
#include "hte/partition.hpp"
#include "hte/rng.hpp"

namespace {

using namespace hte;

const Dataset& counter_data() {
  static const Dataset d = gen_counter3d(8000, 1);
  return d;
}

TrainConfig nht_config() {
  TrainConfig cfg;
  cfg.members = 30;
  cfg.seed = 3;
  return cfg;
}

TrainConfig kht_config() {
  TrainConfig cfg;
  cfg.mode = Mode::kKht;
  cfg.partition = PartitionKind::kAdaptive;
  cfg.min_leaf = 400;
  cfg.members = 8;
  cfg.seed = 3;
  return cfg;
}

void train(benchmark::State& state, const TrainConfig& cfg) {
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto model = threads == 0 ? train_ensemble_serial(counter_data(), cfg)
                              : train_ensemble(counter_data(), cfg, threads);
    benchmark::DoNotOptimize(model.members.data());
  }
}

void BM_TrainNht(benchmark::State& state) { train(state, nht_config()); }
void BM_TrainKht(benchmark::State& state) { train(state, kht_config()); }

void BM_Predict(benchmark::State& state) {
  static const EnsembleModel model = train_ensemble(counter_data(), kht_config());
  static const Dataset test = gen_counter3d(20000, 2);
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    Vector p = threads == 0 ? predict_serial(model, test.x) : predict(model, test.x, threads);
    benchmark::DoNotOptimize(p.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(test.size()));
}

void BM_FitKernelCells(benchmark::State& state) {
  const Dataset& d = counter_data();
  Rng rng(11);
  const AdaptiveBuild b = build_adaptive(sample_rotation(d.dim(), rng), d.x, 300);
  KernelFitOptions opts;
  opts.clip_bound = d.y.cwiseAbs().maxCoeff();
  const int threads = static_cast<int>(state.range(0));
  ThreadLimit limit(threads);
  for (auto _ : state) {
    auto m = threads == 0 ? fit_kernel_cells_serial(d.x, d.y, b.row_cells, b.tree.n_cells(), opts)
                          : fit_kernel_cells(d.x, d.y, b.row_cells, b.tree.n_cells(), opts);
    benchmark::DoNotOptimize(m.cells.data());
  }
}

void thread_args(benchmark::internal::Benchmark* b) {
  b->Arg(0)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
}

BENCHMARK(BM_TrainNht)->Apply(thread_args);
BENCHMARK(BM_TrainKht)->Apply(thread_args);
BENCHMARK(BM_Predict)->Apply(thread_args);
BENCHMARK(BM_FitKernelCells)->Apply(thread_args);

}  // namespace

BENCHMARK_MAIN();
