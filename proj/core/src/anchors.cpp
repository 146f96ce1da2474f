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

#include "otbridge/anchors.hpp"

#include <cmath>
#include <unordered_set>

#include "otbridge/io/embedding_file.hpp"
#include "otbridge/io/text_files.hpp"

namespace otbridge {

WordAnchorSpace WordAnchorSpace::create(Matrix weights, std::vector<std::string> vocab, Vector mu,
                                        bool normalize) {
  const Eigen::Index k = weights.rows();
  if (k == 0 || weights.cols() == 0) throw ValidationError("anchor space must be non-empty");
  if (static_cast<Eigen::Index>(vocab.size()) != k || mu.size() != k) {
    throw ValidationError("dimension mismatch: " + std::to_string(k) + " anchor rows, " +
                          std::to_string(vocab.size()) + " vocab entries, " +
                          std::to_string(mu.size()) + " marginal entries");
  }
  if (!weights.allFinite()) throw ValidationError("anchor embeddings must be finite");
  if (!mu.allFinite() || (mu.array() <= 0.0).any()) {
    throw ValidationError("word marginal must be strictly positive");
  }
  if (std::abs(mu.sum() - 1.0) > 1e-9) throw ValidationError("word marginal must sum to 1");
  std::unordered_set<std::string> seen;
  for (const auto& token : vocab) {
    if (!seen.insert(token).second) throw ValidationError("duplicate vocab token '" + token + "'");
  }

  WordAnchorSpace space;
  space.weights_ = normalize ? normalize_rows(weights) : std::move(weights);
  space.vocab_ = std::move(vocab);
  space.mu_ = std::move(mu);
  space.normalized_ = normalize;
  return space;
}

Eigen::Index WordAnchorSpace::index_of(const std::string& token) const {
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (vocab_[i] == token) return static_cast<Eigen::Index>(i);
  }
  return -1;
}

Vector smooth_marginal(const Vector& raw) {
  if (raw.size() == 0) throw ValidationError("empty marginal");
  const double total = raw.sum();
  if (!(total > 0.0)) throw ValidationError("empty corpus");
  Vector p = raw / total;
  p.array() += kMarginalFloor;
  return p / p.sum();
}

Vector estimate_marginal(const TokenCounts& counts, const std::vector<std::string>& vocab) {
  if (vocab.empty()) throw ValidationError("vocabulary is empty");
  Vector raw = Vector::Zero(static_cast<Eigen::Index>(vocab.size()));
  for (std::size_t k = 0; k < vocab.size(); ++k) {
    if (const auto it = counts.counts.find(vocab[k]); it != counts.counts.end()) {
      raw(static_cast<Eigen::Index>(k)) = static_cast<double>(it->second);
    }
  }
  if (!(raw.sum() > 0.0)) throw ValidationError("empty corpus");
  return smooth_marginal(raw);
}

WordAnchorSpace load_anchor_space(const std::filesystem::path& embeddings_path,
                                  const std::filesystem::path& vocab_path,
                                  const std::filesystem::path& counts_path, bool normalize) {
  Matrix weights = io::read_embedding_file(embeddings_path);
  auto vocab = io::read_vocab(vocab_path);
  if (static_cast<Eigen::Index>(vocab.size()) != weights.rows()) {
    throw ValidationError("dimension mismatch: " + std::to_string(weights.rows()) +
                          " embedding rows vs " + std::to_string(vocab.size()) + " vocab lines");
  }
  TokenCounts counts{io::read_counts(counts_path)};
  Vector mu = estimate_marginal(counts, vocab);
  return WordAnchorSpace::create(std::move(weights), std::move(vocab), std::move(mu), normalize);
}

void write_anchor_space(const std::filesystem::path& embeddings_path,
                        const std::filesystem::path& vocab_path,
                        const std::filesystem::path& counts_path, const Matrix& weights,
                        const std::vector<std::string>& vocab, const TokenCounts& counts) {
  if (static_cast<Eigen::Index>(vocab.size()) != weights.rows()) {
    throw ValidationError("dimension mismatch between embeddings and vocab");
  }
  io::write_embedding_file(embeddings_path, weights);
  io::write_vocab(vocab_path, vocab);
  io::write_counts(counts_path, counts.counts);
}

}  // namespace otbridge
