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

#include "otbridge/types.hpp"

namespace otbridge {

// Floor added to every raw word probability before renormalizing, so that no
// row marginal of the transport problem is exactly zero.
inline constexpr double kMarginalFloor = 1e-8;

struct TokenCounts {
  std::map<std::string, std::uint64_t> counts;
};

// The frozen central space: K anchor embeddings (rows of `weights`), their
// surface tokens, and the word marginal mu. Immutable once built.
class WordAnchorSpace {
 public:
  WordAnchorSpace() = default;

  // Validates shapes and mu; when `normalize` is set the rows of `weights`
  // are rescaled to unit L2 norm (zero rows are rejected).
  static WordAnchorSpace create(Matrix weights, std::vector<std::string> vocab, Vector mu,
                                bool normalize);

  [[nodiscard]] const Matrix& weights() const { return weights_; }
  [[nodiscard]] const std::vector<std::string>& vocab() const { return vocab_; }
  [[nodiscard]] const Vector& mu() const { return mu_; }
  [[nodiscard]] bool normalized() const { return normalized_; }
  [[nodiscard]] Eigen::Index size() const { return weights_.rows(); }
  [[nodiscard]] Eigen::Index dim() const { return weights_.cols(); }

  // Index of `token` in the vocabulary, or -1.
  [[nodiscard]] Eigen::Index index_of(const std::string& token) const;

 private:
  Matrix weights_;
  std::vector<std::string> vocab_;
  Vector mu_;
  bool normalized_ = false;
};

// Empirical word marginal N_k / sum N_k over `vocab`, with kMarginalFloor
// smoothing. Tokens absent from `counts` count as zero; tokens outside
// `vocab` are ignored.
[[nodiscard]] Vector estimate_marginal(const TokenCounts& counts,
                                       const std::vector<std::string>& vocab);

// Applies the floor-and-renormalize smoothing to an already normalized
// (or raw nonnegative) weight vector.
[[nodiscard]] Vector smooth_marginal(const Vector& raw);

[[nodiscard]] WordAnchorSpace load_anchor_space(const std::filesystem::path& embeddings_path,
                                                const std::filesystem::path& vocab_path,
                                                const std::filesystem::path& counts_path,
                                                bool normalize);

// Writes the embedding, vocab and counts files that load_anchor_space reads.
void write_anchor_space(const std::filesystem::path& embeddings_path,
                        const std::filesystem::path& vocab_path,
                        const std::filesystem::path& counts_path, const Matrix& weights,
                        const std::vector<std::string>& vocab, const TokenCounts& counts);

}  // namespace otbridge
