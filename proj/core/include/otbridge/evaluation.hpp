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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "otbridge/anchors.hpp"
#include "otbridge/decoder.hpp"
#include "otbridge/ot_solver.hpp"
#include "otbridge/types.hpp"

namespace otbridge {

struct RetrievalResult {
  std::vector<std::vector<int>> rankings;  // per query, gallery indices best first
  std::map<int, double> recall_at;         // k -> fraction of queries with their pair in top k
};

// Text-to-image retrieval by cosine similarity; query i is paired with
// gallery item i. Ties rank the lower gallery index first.
[[nodiscard]] RetrievalResult t2i_retrieve(const PooledBatch& queries, const PooledBatch& gallery,
                                           std::span<const int> ks);

struct CandidateRanking {
  int best = 0;
  std::vector<double> losses;  // mean per-token negative log-likelihood
};

// Scores each candidate answer by its length-normalized caption loss given
// the prompts and question tokens, and picks the lowest (first on ties).
[[nodiscard]] CandidateRanking it2t_rank(const FrozenDecoder& decoder, const Matrix& prompts,
                                         std::span<const int> question_ids,
                                         std::span<const std::vector<int>> candidates);

struct GapReport {
  Vector delta;
  double norm = 0.0;
  Vector centroid_visual;
  Vector centroid_text;
};

// Centroid difference Δ = mean(v) - mean(t). With normalize set, each pooled
// row is L2-normalized first.
[[nodiscard]] GapReport modality_gap(const PooledBatch& pooled_v, const PooledBatch& pooled_t,
                                     bool normalize = false);

struct SignedTerm {
  int sign = +1;
  Vector vector;
};

[[nodiscard]] Vector semantic_arithmetic(std::span<const SignedTerm> terms,
                                         bool normalize = false);

struct AnchorMatch {
  Eigen::Index index = 0;
  std::string token;
  double similarity = 0.0;
};

// Top-k anchors by cosine similarity, descending, lower index first on ties.
// Indices in `exclude` are skipped.
[[nodiscard]] std::vector<AnchorMatch> nearest_anchors(const Vector& query,
                                                       const WordAnchorSpace& space,
                                                       Eigen::Index k,
                                                       std::span<const Eigen::Index> exclude = {});

struct WordMass {
  Eigen::Index index = 0;
  std::string token;
  double mass = 0.0;
};

// For each column of Q, the k rows carrying the most mass.
[[nodiscard]] std::vector<std::vector<WordMass>> top_words_per_item(
    const AssignmentMatrix& q, const std::vector<std::string>& vocab, Eigen::Index k);

// Projects rows onto their first two principal components (n x 2). Each
// component's sign is fixed so its largest-magnitude loading is positive.
[[nodiscard]] Matrix pca_2d(const Matrix& rows);

// CSV exports.
void write_rankings_csv(const std::filesystem::path& path, const RetrievalResult& result,
                        int top);
void write_gap_csv(const std::filesystem::path& path, const PooledBatch& pooled_v,
                   const PooledBatch& pooled_t);
void write_neighbors_csv(const std::filesystem::path& path,
                         const std::vector<AnchorMatch>& matches);

}  // namespace otbridge
