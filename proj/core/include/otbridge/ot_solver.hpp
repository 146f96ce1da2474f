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

#include "otbridge/anchors.hpp"
#include "otbridge/types.hpp"

namespace otbridge {

struct SolverConfig {
  double eps = 0.05;     // entropy smoothness
  double tol = 1e-6;     // max-norm marginal violation at convergence
  int max_iter = 500;
  bool log_domain = true;

  void validate() const;
};

// Similarity scores between K central vectors and B pooled items (K x B).
struct ScoreMatrix {
  Matrix scores;
};

// Soft transport plan Q (K x B). Q = Diag(exp(log_row_scaling)) *
// exp(S / eps) * Diag(exp(log_column_scaling)); the scalings are kept in log
// form because they overflow f64 for small eps.
struct AssignmentMatrix {
  Matrix plan;
  int iterations_used = 0;
  double marginal_error = 0.0;
  bool converged = false;
  Vector log_row_scaling;
  Vector log_column_scaling;

  // The column re-normalization vector c (may overflow to inf for tiny eps).
  [[nodiscard]] Vector column_scaling() const { return log_column_scaling.array().exp(); }
};

// Learnable central space used by the "no word embeddings" ablation.
// Rows are kept at unit L2 norm.
struct PrototypeSpace {
  Matrix prototypes;

  static PrototypeSpace random(Eigen::Index count, Eigen::Index dim, std::uint64_t seed);
  void renormalize();
};

// S = central * pooled^T, optionally on L2-normalized rows of both.
[[nodiscard]] ScoreMatrix score_matrix(const Matrix& central, const PooledBatch& pooled,
                                       bool normalize);

// Sinkhorn-Knopp for max <Q, S> + eps H(Q) subject to Q 1 = row_marginal,
// Q^T 1 = col_marginal. Both marginals must be strictly positive and sum to 1.
// If max_iter is reached the best iterate is returned with converged = false.
[[nodiscard]] AssignmentMatrix sinkhorn(const ScoreMatrix& s, const Vector& row_marginal,
                                        const Vector& col_marginal, const SolverConfig& cfg);

// Assigns pooled items to the word anchors under the word-marginal polytope
// (row marginal mu, uniform 1/B column marginal).
[[nodiscard]] AssignmentMatrix assign_batch(const WordAnchorSpace& space,
                                            const PooledBatch& pooled, const SolverConfig& cfg);

// Equipartition variant: uniform 1/K row marginal over an arbitrary central
// matrix (word anchors or prototypes).
[[nodiscard]] AssignmentMatrix equipartition_assign(const Matrix& central,
                                                    const PooledBatch& pooled,
                                                    const SolverConfig& cfg, bool normalize);

// H(Q) = -sum Q_ij log Q_ij, with 0 log 0 = 0.
[[nodiscard]] double assignment_entropy(const AssignmentMatrix& q);

}  // namespace otbridge
