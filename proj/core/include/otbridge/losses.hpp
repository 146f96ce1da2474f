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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "otbridge/anchors.hpp"
#include "otbridge/decoder.hpp"
#include "otbridge/ot_solver.hpp"
#include "otbridge/types.hpp"

namespace otbridge {

inline constexpr const char* kMapLoss = "map";
inline constexpr const char* kCapLoss = "cap";
inline constexpr const char* kItcLoss = "itc";
inline constexpr const char* kItmLoss = "itm";

struct LossConfig {
  double tau = 0.1;
  double lambda_map = 0.6;
  double lambda_cap = 0.4;
  double lambda_itc = 0.0;
  double lambda_itm = 0.0;
  double itc_temperature = 0.07;

  // Checks signs and temperatures; a training run additionally needs
  // lambda_map + lambda_cap > 0.
  void validate(bool for_training) const;
  [[nodiscard]] double weight(const std::string& component) const;
};

// Binary image-text matching head: logits = weight * [v ; t] + bias, with
// weight 2 x 2d (row 0 = "unmatched", row 1 = "matched").
struct ItmHead {
  Matrix weight;
  Vector bias;

  static ItmHead zeros(Eigen::Index dim);
  static ItmHead random(Eigen::Index dim, std::uint64_t seed);
};

// A loss value with gradients for every trainable input it touches. Empty
// matrices mean "no gradient flows there".
struct LossValue {
  double total = 0.0;
  std::map<std::string, double> components;
  Matrix grad_pooled_v;                 // B x d
  std::vector<Matrix> grad_prompts;     // per item, N_p x d
  Matrix grad_central;                  // K x d, only when requested
  std::optional<ItmHead> grad_itm_head;
};

// Softmax over anchors of <z_n, w_k> / tau (B x K), on unit-normalized
// vectors when `normalize` is set.
[[nodiscard]] Matrix word_probs(const PooledBatch& pooled, const Matrix& central, double tau,
                                bool normalize);
[[nodiscard]] Matrix word_probs(const PooledBatch& pooled, const WordAnchorSpace& space,
                                double tau);

// Swapped assignment prediction:
//   L = -(1/B) sum_n sum_k [ q^t_nk log P^v_nk + q^v_nk log P^t_nk ]
// where each column of Q is rescaled to sum to one. Both plans are
// constants. grad_pooled_v covers the visual term only (the text side is
// frozen); grad_central is filled when `central_grad` is set.
[[nodiscard]] LossValue assignment_prediction_loss(const AssignmentMatrix& q_v,
                                                   const AssignmentMatrix& q_t,
                                                   const PooledBatch& pooled_v,
                                                   const PooledBatch& pooled_t,
                                                   const Matrix& central, double tau,
                                                   bool normalize, bool central_grad = false);
[[nodiscard]] LossValue assignment_prediction_loss(const AssignmentMatrix& q_v,
                                                   const AssignmentMatrix& q_t,
                                                   const PooledBatch& pooled_v,
                                                   const PooledBatch& pooled_t,
                                                   const WordAnchorSpace& space, double tau);

// Prefix language-modelling loss with teacher forcing:
//   L = -(1/B) sum_n (1/N_t) sum_t log f(s_t | prompts_n, prefix, s_<t)
[[nodiscard]] LossValue caption_loss(const FrozenDecoder& decoder,
                                     std::span<const Matrix> prompts,
                                     std::span<const int> prefix_ids,
                                     std::span<const std::vector<int>> target_ids);

// Symmetric InfoNCE over cosine similarities / temperature; the diagonal
// is the positive class.
[[nodiscard]] LossValue itc_loss(const PooledBatch& pooled_v, const PooledBatch& pooled_t,
                                 double temperature);

// Matching head trained on every positive pair plus, for each image and
// each text, its hardest in-batch negative by cosine similarity. Mean
// two-class cross-entropy over the 3B examples.
[[nodiscard]] LossValue itm_loss(const PooledBatch& pooled_v, const PooledBatch& pooled_t,
                                 const ItmHead& head);

// Weighted sum of single-component losses; gradients are combined with the
// same weights.
[[nodiscard]] LossValue total_loss(std::span<const LossValue> components, const LossConfig& cfg);

}  // namespace otbridge
