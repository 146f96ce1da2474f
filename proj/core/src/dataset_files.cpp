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

#include "otbridge/io/dataset_files.hpp"

#include "otbridge/io/embedding_file.hpp"
#include "otbridge/io/text_files.hpp"

namespace otbridge::io {
namespace {

Matrix stack(const EmbeddingBatch& batch) {
  Eigen::Index rows = 0;
  for (const auto& item : batch.items) rows += item.rows();
  Matrix out(rows, batch.dim());
  Eigen::Index at = 0;
  for (const auto& item : batch.items) {
    out.middleRows(at, item.rows()) = item;
    at += item.rows();
  }
  return out;
}

}  // namespace

void write_split(const DatasetPaths& paths, const std::string& split, const PairedDataset& data) {
  if (data.size() == 0) throw ValidationError("cannot write an empty split");
  const Eigen::Index patches = data.visual.items.front().rows();
  for (std::size_t n = 0; n < data.size(); ++n) {
    if (data.visual.items[n].rows() != patches) {
      throw ValidationError("visual items must all have the same number of patches");
    }
    if (data.text.items[n].rows() != static_cast<Eigen::Index>(data.captions[n].size())) {
      throw ValidationError("item " + std::to_string(n) + " has " +
                            std::to_string(data.text.items[n].rows()) + " text rows but " +
                            std::to_string(data.captions[n].size()) + " caption tokens");
    }
  }
  std::filesystem::create_directories(paths.dir);
  write_embedding_file(paths.visual(split), stack(data.visual));
  write_embedding_file(paths.text(split), stack(data.text));
  write_captions(paths.captions(split), data.captions);
}

PairedDataset read_split(const DatasetPaths& paths, const std::string& split,
                         Eigen::Index patches_per_item) {
  if (patches_per_item < 1) throw ValidationError("patches_per_item must be at least 1");
  PairedDataset data;
  data.captions = read_captions(paths.captions(split));
  const Matrix visual = read_embedding_file(paths.visual(split));
  const Matrix text = read_embedding_file(paths.text(split));
  const auto items = static_cast<Eigen::Index>(data.captions.size());
  if (visual.rows() != items * patches_per_item) {
    throw ValidationError(split + " split: " + std::to_string(visual.rows()) +
                          " visual rows for " + std::to_string(items) + " items of " +
                          std::to_string(patches_per_item) + " patches");
  }
  Eigen::Index at = 0;
  for (Eigen::Index n = 0; n < items; ++n) {
    data.visual.items.push_back(visual.middleRows(n * patches_per_item, patches_per_item));
    const auto len = static_cast<Eigen::Index>(data.captions[static_cast<std::size_t>(n)].size());
    if (at + len > text.rows()) {
      throw ValidationError(split + " split: too few text rows for the captions");
    }
    data.text.items.push_back(text.middleRows(at, len));
    at += len;
  }
  if (at != text.rows()) {
    throw ValidationError(split + " split: text rows do not match caption lengths");
  }
  return data;
}

Eigen::Index read_patches_per_item(const DatasetPaths& paths) {
  for (const auto& [key, value] : read_key_values(paths.meta())) {
    if (key != "patches_per_item") continue;
    try {
      std::size_t used = 0;
      const long long v = std::stoll(value, &used);
      if (used == value.size() && v >= 1) return static_cast<Eigen::Index>(v);
    } catch (const std::logic_error&) {
    }
    throw ValidationError("invalid patches_per_item in " + paths.meta().string());
  }
  throw ValidationError("dataset.meta lacks patches_per_item");
}

}  // namespace otbridge::io
