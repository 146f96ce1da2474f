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
#include <span>

#include "otbridge/types.hpp"

namespace otbridge {

// The single trainable map g(x) = weight * x + bias from the visual feature
// space (d_v) into the anchor space (d).
struct LinearBridge {
  Matrix weight;     // d x d_v
  Vector bias;       // length d, or empty when the bias is disabled
  std::uint64_t init_seed = 0;

  // weight ~ U(-1/sqrt(d_v), 1/sqrt(d_v)), bias = 0.
  static LinearBridge initialize(Eigen::Index out_dim, Eigen::Index in_dim, bool with_bias,
                                 std::uint64_t seed);

  [[nodiscard]] bool has_bias() const { return bias.size() > 0; }
  [[nodiscard]] Eigen::Index out_dim() const { return weight.rows(); }
  [[nodiscard]] Eigen::Index in_dim() const { return weight.cols(); }
  [[nodiscard]] Eigen::Index parameter_count() const { return weight.size() + bias.size(); }

  // Flattened parameters: weight (column-major) followed by bias.
  [[nodiscard]] Vector parameters() const;
  void set_parameters(const Vector& flat);
};

// Applies the bridge to every row of every item.
[[nodiscard]] EmbeddingBatch project(const LinearBridge& bridge, const EmbeddingBatch& batch);
[[nodiscard]] Matrix project_rows(const LinearBridge& bridge, const Matrix& rows);

// Per-item arithmetic mean of the sequence rows.
[[nodiscard]] PooledBatch pool(const EmbeddingBatch& batch);

// Gradient of a loss with respect to the flattened bridge parameters, given
// the gradient with respect to every projected row of `inputs` (one N_p x d
// matrix per item, aligned with inputs.items).
[[nodiscard]] Vector bridge_gradient(const LinearBridge& bridge, const EmbeddingBatch& inputs,
                                     std::span<const Matrix> grad_projected);

}  // namespace otbridge
