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
#include <functional>
#include <vector>

#include "otbridge/types.hpp"

// Reference implementations written independently of the library code. They
// favour clarity over speed and are only used to check library results.
namespace otbridge::oracle {

// Standard-normal entries from a seeded mt19937_64.
[[nodiscard]] Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

// A strictly positive probability vector.
[[nodiscard]] Vector random_simplex(Eigen::Index n, std::uint64_t seed);

// Unit-norm rows.
[[nodiscard]] Matrix unit_rows(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

// Linear-domain Sinkhorn in long double for a fixed number of sweeps
// (row update then column update).
[[nodiscard]] Matrix reference_sinkhorn(const Matrix& scores, const Vector& row_marginal,
                                        const Vector& col_marginal, double eps, int sweeps);

// -sum q log q by direct summation, skipping zeros.
[[nodiscard]] double entropy(const Matrix& q);

// Row-wise softmax of scores / tau, by exp and divide.
[[nodiscard]] Matrix softmax_rows(const Matrix& scores, double tau);

// Central differences of f at x, one coordinate at a time.
[[nodiscard]] Vector central_difference(const std::function<double(const Vector&)>& f,
                                        const Vector& x, double h);

// ||a - b|| / max(||a||, ||b||), with 0 when both vanish.
[[nodiscard]] double relative_error(const Vector& a, const Vector& b);

[[nodiscard]] Vector flatten(const Matrix& m);
[[nodiscard]] Matrix unflatten(const Vector& v, Eigen::Index rows, Eigen::Index cols);

// Scalar AdamW on f(w) = w^2 / 2 with a constant learning rate.
[[nodiscard]] std::vector<double> adamw_quadratic(double w0, double lr, double beta1,
                                                  double beta2, double eps, double weight_decay,
                                                  int steps);

// Indices 0..n-1 ordered by descending value, lower index first on ties,
// using a full pairwise comparison count.
[[nodiscard]] std::vector<int> rank_descending(const std::vector<double>& values);

// Relative errors of analytic gradients against central finite differences
// for one random instance per loss.
struct GradientReport {
  double map_pooled = 0.0;
  double map_central = 0.0;
  double cap_prompts = 0.0;
  double itc_pooled = 0.0;
  double itm_head = 0.0;
  double itm_pooled = 0.0;
  double end_to_end = 0.0;
  [[nodiscard]] double worst() const;
};

[[nodiscard]] GradientReport gradient_suite(std::uint64_t seed, double h = 1e-5);

}  // namespace otbridge::oracle
