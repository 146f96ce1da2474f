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

#include "otbridge/metrics.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace otbridge {

std::string to_json_line(const StepMetrics& m) {
  nlohmann::ordered_json j;
  j["step"] = m.step;
  j["lr"] = m.lr;
  j["loss"] = m.loss;
  for (const auto& [name, value] : m.components) j["components"][name] = value;
  j["marginal_error"] = m.marginal_error;
  j["sinkhorn_iterations"] = m.sinkhorn_iterations;
  if (m.gap_norm) j["gap_norm"] = *m.gap_norm;
  if (!std::isfinite(m.loss)) j["error"] = "non-finite loss";
  return j.dump();
}

std::string to_jsonl(std::span<const StepMetrics> log) {
  std::string out;
  for (const auto& m : log) {
    out += to_json_line(m);
    out += '\n';
  }
  return out;
}

}  // namespace otbridge
