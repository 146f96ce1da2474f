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

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "otbridge/anchors.hpp"
#include "otbridge/bridge.hpp"
#include "otbridge/decoder.hpp"
#include "otbridge/losses.hpp"
#include "otbridge/optim.hpp"
#include "otbridge/ot_solver.hpp"

namespace otbridge {

// Which central space and row marginal the assignment step uses.
enum class CentralSpace {
  words,          // word anchors, row marginal mu_W
  equipartition,  // word anchors, uniform row marginal
  prototypes,     // learnable prototypes, uniform row marginal
};

[[nodiscard]] std::string to_string(CentralSpace c);
[[nodiscard]] CentralSpace central_space_from_string(const std::string& s);

// Paired visual/text training data. Text rows live in the anchor space.
struct PairedDataset {
  EmbeddingBatch visual;                 // per item N_p x d_v
  EmbeddingBatch text;                   // per item T_n x d
  std::vector<std::vector<int>> captions;

  [[nodiscard]] std::size_t size() const { return visual.size(); }
  void validate(Eigen::Index anchor_dim, Eigen::Index vocab_size) const;
  [[nodiscard]] PairedDataset subset(std::span<const std::size_t> indices) const;
};

struct TrainConfig {
  double lr = 5e-3;
  std::int64_t warmup_steps = 100;
  std::int64_t total_steps = 2000;
  std::int64_t batch_size = 32;
  AdamWConfig adamw;
  SolverConfig solver;
  LossConfig loss;
  std::uint64_t seed = 0;
  bool use_bias = true;
  CentralSpace central = CentralSpace::words;
  std::int64_t num_prototypes = 3000;
  std::vector<int> prefix_ids = {1, 2, 3};  // "A photo of"
  std::int64_t gap_every = 50;

  void validate() const;
};

struct StepMetrics {
  std::int64_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
  std::map<std::string, double> components;
  double marginal_error = 0.0;
  int sinkhorn_iterations = 0;
  std::optional<double> gap_norm;
};

using MetricsSink = std::function<void(const StepMetrics&)>;

struct TrainResult {
  LinearBridge bridge;
  std::vector<StepMetrics> log;
  std::optional<PrototypeSpace> prototypes;
  std::optional<ItmHead> itm_head;
};

// Q^v and Q^t for one batch; treated as constants by the losses.
struct BatchAssignments {
  AssignmentMatrix visual;
  AssignmentMatrix text;
};

// Loss and gradients for one batch at fixed assignments.
struct BatchEvaluation {
  LossValue loss;
  Vector bridge_grad;
  Matrix central_grad;                // prototypes only
  std::optional<ItmHead> itm_head_grad;
};

// Pooled, projected visual features for the given items.
[[nodiscard]] PooledBatch pooled_visual(const LinearBridge& bridge, const PairedDataset& data);
[[nodiscard]] PooledBatch pooled_text(const PairedDataset& data);

[[nodiscard]] BatchAssignments compute_assignments(const LinearBridge& bridge,
                                                   const PairedDataset& batch,
                                                   const Matrix& central, bool normalize,
                                                   const Vector& row_marginal,
                                                   const SolverConfig& cfg);

[[nodiscard]] BatchEvaluation evaluate_batch(const LinearBridge& bridge,
                                             const PairedDataset& batch,
                                             const Matrix& central, bool normalize,
                                             const FrozenDecoder& decoder,
                                             const TrainConfig& cfg,
                                             const BatchAssignments& assignments,
                                             const ItmHead* itm_head);

// Full training run. Deterministic given (dataset, space, decoder, cfg).
// Throws RuntimeError on a non-finite loss after reporting a diagnostic
// record (loss = NaN) to `sink`.
[[nodiscard]] TrainResult train(const PairedDataset& dataset, const WordAnchorSpace& space,
                                const FrozenDecoder& decoder, const TrainConfig& cfg,
                                const MetricsSink& sink = {});

}  // namespace otbridge
