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

#include "otbridge/optim.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace otbridge {

double lr_at(std::int64_t step, double peak_lr, std::int64_t warmup_steps,
             std::int64_t total_steps) {
  if (warmup_steps < 0 || total_steps < 1 || warmup_steps > total_steps) {
    throw ValidationError("invalid schedule: need 0 <= warmup_steps <= total_steps, total >= 1");
  }
  if (step < 0 || step > total_steps) {
    throw ValidationError("step " + std::to_string(step) + " outside [0, " +
                          std::to_string(total_steps) + "]");
  }
  if (step == total_steps) return 0.0;
  if (step < warmup_steps) {
    return peak_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
  }
  const double progress = static_cast<double>(step - warmup_steps) /
                          static_cast<double>(total_steps - warmup_steps);
  return 0.5 * peak_lr * (1.0 + std::cos(std::numbers::pi * progress));
}

AdamWState AdamWState::zeros(Eigen::Index size) {
  return {Vector::Zero(size), Vector::Zero(size), 0};
}

void adamw_step(Vector& params, const Vector& grads, AdamWState& state, std::int64_t step,
                double lr, const AdamWConfig& cfg) {
  if (params.size() != grads.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw ValidationError("AdamW shapes do not match");
  }
  if (step < 1) throw ValidationError("AdamW step index is 1-based");
  if (!grads.allFinite()) {
    throw RuntimeError("non-finite gradient at step " + std::to_string(step));
  }
  state.first_moment = cfg.beta1 * state.first_moment + (1.0 - cfg.beta1) * grads;
  state.second_moment =
      cfg.beta2 * state.second_moment + (1.0 - cfg.beta2) * grads.cwiseProduct(grads);
  state.steps_taken = step;

  const double correction1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double correction2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  params *= 1.0 - lr * cfg.weight_decay;
  params.array() -= lr * (state.first_moment.array() / correction1) /
                    ((state.second_moment.array() / correction2).sqrt() + cfg.eps);
}

}  // namespace otbridge
