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

#include "otbridge/types.hpp"

namespace otbridge {

// Linear warmup from 0 to peak over warmup_steps, then half-cosine decay to
// exactly 0 at total_steps. With warmup_steps == 0 the decay starts at the
// peak on step 0. If warmup_steps == total_steps the final-zero endpoint wins.
[[nodiscard]] double lr_at(std::int64_t step, double peak_lr, std::int64_t warmup_steps,
                           std::int64_t total_steps);

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

struct AdamWState {
  Vector first_moment;
  Vector second_moment;
  std::int64_t steps_taken = 0;

  static AdamWState zeros(Eigen::Index size);
};

// One decoupled-weight-decay Adam update (bias-corrected moments):
//   p <- p - lr * wd * p
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
// `step` is 1-based. Throws RuntimeError naming the step on a non-finite
// gradient.
void adamw_step(Vector& params, const Vector& grads, AdamWState& state, std::int64_t step,
                double lr, const AdamWConfig& cfg);

}  // namespace otbridge
