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
#include <string>

#include "otbridge/anchors.hpp"
#include "otbridge/trainer.hpp"

namespace otbridge::io {

// A dataset directory:
//
//   anchors.emb, vocab.txt, counts.tsv   the word anchor space
//   dataset.meta                         patches_per_item plus free-form keys
//   <split>_visual.emb                   items * patches_per_item rows of d_v
//   <split>_text.emb                     one row per caption token, d columns
//   <split>_captions.txt                 token ids, one caption per line
//
// Text rows are stacked in caption order, so item n owns as many text rows
// as its caption has tokens.
struct DatasetPaths {
  std::filesystem::path dir;

  [[nodiscard]] std::filesystem::path anchors() const { return dir / "anchors.emb"; }
  [[nodiscard]] std::filesystem::path vocab() const { return dir / "vocab.txt"; }
  [[nodiscard]] std::filesystem::path counts() const { return dir / "counts.tsv"; }
  [[nodiscard]] std::filesystem::path meta() const { return dir / "dataset.meta"; }
  [[nodiscard]] std::filesystem::path visual(const std::string& split) const {
    return dir / (split + "_visual.emb");
  }
  [[nodiscard]] std::filesystem::path text(const std::string& split) const {
    return dir / (split + "_text.emb");
  }
  [[nodiscard]] std::filesystem::path captions(const std::string& split) const {
    return dir / (split + "_captions.txt");
  }
};

// Every visual item must have exactly `patches_per_item` rows.
void write_split(const DatasetPaths& paths, const std::string& split, const PairedDataset& data);
[[nodiscard]] PairedDataset read_split(const DatasetPaths& paths, const std::string& split,
                                       Eigen::Index patches_per_item);

// Reads patches_per_item from dataset.meta.
[[nodiscard]] Eigen::Index read_patches_per_item(const DatasetPaths& paths);

}  // namespace otbridge::io
