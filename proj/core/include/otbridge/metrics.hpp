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

#include <span>
#include <string>

#include "otbridge/trainer.hpp"

namespace otbridge {

// One JSON object (no trailing newline).
[[nodiscard]] std::string to_json_line(const StepMetrics& m);
[[nodiscard]] std::string to_jsonl(std::span<const StepMetrics> log);

}  // namespace otbridge
