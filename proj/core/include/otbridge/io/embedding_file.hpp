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

#include "otbridge/types.hpp"

namespace otbridge::io {

// Binary matrix format shared by anchors, checkpoints, feature dumps and
// assignment dumps:
//
//   offset 0   8 bytes   magic "OTBEMB1\0"
//   offset 8   u32 LE    rows
//   offset 12  u32 LE    cols
//   offset 16  f32 LE    rows*cols values, row-major
//
// Values are stored as f32; the in-memory matrix is f64, so a write/read
// cycle is exact only for values already representable as f32.
inline constexpr char kEmbeddingMagic[8] = {'O', 'T', 'B', 'E', 'M', 'B', '1', '\0'};

void write_embedding_file(const std::filesystem::path& path, const Matrix& m);
[[nodiscard]] Matrix read_embedding_file(const std::filesystem::path& path);

// Round every entry to the nearest f32.
[[nodiscard]] Matrix round_to_f32(const Matrix& m);

// Writes `contents` to a sibling temp file then renames it over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

}  // namespace otbridge::io
