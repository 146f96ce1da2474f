// Copyright 2026 The otbridge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <random>

#include "otbridge/evaluation.hpp"
#include "otbridge/ot_solver.hpp"
#include "otbridge/synthetic.hpp"
#include "otbridge/trainer.hpp"

namespace otbridge {
namespace {

Matrix unit_gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m = Matrix::NullaryExpr(rows, cols, [&] { return normal(rng); });
  return normalize_rows(m);
}

// args: K, B, eps * 1000, log_domain
void BM_Sinkhorn(benchmark::State& state) {
  const Eigen::Index k = state.range(0);
  const Eigen::Index b = state.range(1);
  SolverConfig cfg;
  cfg.eps = static_cast<double>(state.range(2)) / 1000.0;
  cfg.log_domain = state.range(3) != 0;
  cfg.max_iter = 5000;
  const ScoreMatrix s{unit_gaussian(k, 16, 1) * unit_gaussian(b, 16, 2).transpose()};
  const Vector mu = zipf_marginal(k, 1.0).array() + 1e-3;
  const Vector row = mu / mu.sum();
  const Vector col = Vector::Constant(b, 1.0 / static_cast<double>(b));
  int iterations = 0;
  for (auto _ : state) {
    const auto q = sinkhorn(s, row, col, cfg);
    iterations = q.iterations_used;
    benchmark::DoNotOptimize(q.plan.data());
  }
  state.counters["sinkhorn_iters"] = iterations;
}
BENCHMARK(BM_Sinkhorn)
    ->ArgNames({"K", "B", "eps_milli", "log"})
    ->Args({200, 64, 50, 1})
    ->Args({200, 64, 50, 0})
    ->Args({200, 64, 10, 1})
    ->Args({200, 64, 10, 0})
    ->Args({200, 64, 5, 1})
    ->Args({3000, 128, 50, 1})
    ->Unit(benchmark::kMicrosecond);

// One optimizer step's worth of work: assignments plus loss and gradients.
void BM_TrainStepWork(benchmark::State& state) {
  SyntheticSpec spec;
  const auto data = generate_synthetic(spec);
  const auto decoder = ToyFrozenDecoder::from_space(data.space, {});
  TrainConfig cfg;
  const auto bridge = LinearBridge::initialize(spec.anchor_dim, spec.visual_dim, true, 0);
  std::vector<std::size_t> idx(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const auto batch = data.train.subset(idx);
  for (auto _ : state) {
    const auto q = compute_assignments(bridge, batch, data.space.weights(), true,
                                       data.space.mu(), cfg.solver);
    const auto eval = evaluate_batch(bridge, batch, data.space.weights(), true, decoder, cfg, q,
                                     nullptr);
    benchmark::DoNotOptimize(eval.bridge_grad.data());
  }
}
BENCHMARK(BM_TrainStepWork)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_Retrieval(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const PooledBatch queries{unit_gaussian(n, 64, 3)};
  const PooledBatch gallery{unit_gaussian(n, 64, 4)};
  const std::vector<int> ks = {1, 5, 10};
  for (auto _ : state) {
    const auto r = t2i_retrieve(queries, gallery, ks);
    benchmark::DoNotOptimize(r.recall_at);
  }
}
BENCHMARK(BM_Retrieval)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace otbridge

BENCHMARK_MAIN();
