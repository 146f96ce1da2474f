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

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace otbridge {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Thrown when inputs violate a documented precondition (bad shapes, invalid
// configuration values, malformed files). The CLI maps it to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when a well-formed computation fails at run time (overflow,
// non-finite loss, I/O failure). The CLI maps it to exit code 2.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A batch of variable-length sequences of feature vectors. Each item is a
// matrix with one feature vector per row (N_p x d_v for visual patches,
// T_n x d for caption tokens).
struct EmbeddingBatch {
  std::vector<Matrix> items;

  [[nodiscard]] std::size_t size() const { return items.size(); }
  // Feature dimension shared by every item; throws on an empty or
  // inconsistent batch.
  [[nodiscard]] Eigen::Index dim() const;
};

// Sequence means, one row per item (B x d).
struct PooledBatch {
  Matrix rows;

  [[nodiscard]] Eigen::Index size() const { return rows.rows(); }
  [[nodiscard]] Eigen::Index dim() const { return rows.cols(); }
};

// Copies of `rows` scaled to unit L2 norm. Throws ValidationError on a zero row.
Matrix normalize_rows(const Matrix& rows);

}  // namespace otbridge
