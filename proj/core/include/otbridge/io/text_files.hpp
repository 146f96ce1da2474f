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
#include <map>
#include <string>
#include <vector>

namespace otbridge::io {

// One token per line, UTF-8.
[[nodiscard]] std::vector<std::string> read_vocab(const std::filesystem::path& path);
void write_vocab(const std::filesystem::path& path, const std::vector<std::string>& vocab);

// Lines "token<TAB>count".
[[nodiscard]] std::map<std::string, std::uint64_t> read_counts(const std::filesystem::path& path);
void write_counts(const std::filesystem::path& path,
                  const std::map<std::string, std::uint64_t>& counts);

// Lines of space-separated token ids, one caption per line.
[[nodiscard]] std::vector<std::vector<int>> read_captions(const std::filesystem::path& path);
void write_captions(const std::filesystem::path& path,
                    const std::vector<std::vector<int>>& captions);

// "key = value" lines with '#' comments. Keys keep file order.
[[nodiscard]] std::vector<std::pair<std::string, std::string>> read_key_values(
    const std::filesystem::path& path);
[[nodiscard]] std::vector<std::pair<std::string, std::string>> parse_key_values(
    const std::string& text);
void write_key_values(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace otbridge::io
