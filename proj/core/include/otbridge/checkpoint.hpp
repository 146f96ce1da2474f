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
#include <filesystem>

#include "otbridge/bridge.hpp"

namespace otbridge {

struct Checkpoint {
  LinearBridge bridge;
  std::int64_t step = 0;
};

// <dir>/bridge.emb holds the weight (d x d_v); <dir>/bridge_bias.emb holds the
// bias as a 1 x d matrix when present; <dir>/bridge.meta holds "key = value"
// lines (has_bias, out_dim, in_dim, step, seed). Parameters are stored as f32.
void write_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);
[[nodiscard]] Checkpoint read_checkpoint(const std::filesystem::path& dir);

}  // namespace otbridge
