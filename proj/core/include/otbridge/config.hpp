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

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "otbridge/decoder.hpp"
#include "otbridge/trainer.hpp"

namespace otbridge {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Everything a run needs, flattened to "key = value" form on disk.
struct RunConfig {
  std::string name = "run";
  std::string preset = "desk";
  std::string data_dir;
  std::string out_dir;
  bool normalize = true;
  TrainConfig train;
  ToyFrozenDecoder::Options decoder;
};

// Known presets: "desk", "paper-opt", "paper-t5".
[[nodiscard]] std::vector<std::string> preset_names();
[[nodiscard]] RunConfig preset_config(const std::string& preset);

// Defaults, then the preset named by the file or overrides, then file
// values, then overrides. Unknown keys and invalid values throw
// ValidationError. An empty path means "no file".
[[nodiscard]] RunConfig parse_config(const std::filesystem::path& path,
                                     const KeyValues& overrides);
[[nodiscard]] RunConfig parse_config_text(const std::string& text, const KeyValues& overrides);

// Canonical form: every key, fixed order, doubles printed round-trip exact.
[[nodiscard]] KeyValues to_key_values(const RunConfig& cfg);
[[nodiscard]] std::string to_config_text(const RunConfig& cfg);

// Throws ValidationError naming the missing path key.
void require_path(const RunConfig& cfg, const std::string& key);

}  // namespace otbridge
