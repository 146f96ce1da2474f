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

#include "otbridge/bridge.hpp"

#include <cmath>
#include <random>
#include <string>

namespace otbridge {

LinearBridge LinearBridge::initialize(Eigen::Index out_dim, Eigen::Index in_dim, bool with_bias,
                                      std::uint64_t seed) {
  if (out_dim < 1 || in_dim < 1) throw ValidationError("bridge dimensions must be positive");
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  std::uniform_real_distribution<double> uniform(-bound, bound);
  LinearBridge b;
  b.weight = Matrix::NullaryExpr(out_dim, in_dim, [&] { return uniform(rng); });
  if (with_bias) b.bias = Vector::Zero(out_dim);
  b.init_seed = seed;
  return b;
}

Vector LinearBridge::parameters() const {
  Vector flat(parameter_count());
  flat.head(weight.size()) = Eigen::Map<const Vector>(weight.data(), weight.size());
  if (has_bias()) flat.tail(bias.size()) = bias;
  return flat;
}

void LinearBridge::set_parameters(const Vector& flat) {
  if (flat.size() != parameter_count()) throw ValidationError("parameter vector has wrong size");
  weight = Eigen::Map<const Matrix>(flat.data(), weight.rows(), weight.cols());
  if (has_bias()) bias = flat.tail(bias.size());
}

Matrix project_rows(const LinearBridge& bridge, const Matrix& rows) {
  if (rows.cols() != bridge.in_dim()) {
    throw ValidationError("dimension mismatch: bridge expects " + std::to_string(bridge.in_dim()) +
                          " input features, got " + std::to_string(rows.cols()));
  }
  Matrix out = rows * bridge.weight.transpose();
  if (bridge.has_bias()) out.rowwise() += bridge.bias.transpose();
  return out;
}

EmbeddingBatch project(const LinearBridge& bridge, const EmbeddingBatch& batch) {
  EmbeddingBatch out;
  out.items.reserve(batch.size());
  for (const auto& item : batch.items) out.items.push_back(project_rows(bridge, item));
  return out;
}

PooledBatch pool(const EmbeddingBatch& batch) {
  const Eigen::Index d = batch.dim();
  PooledBatch out{Matrix(static_cast<Eigen::Index>(batch.size()), d)};
  for (std::size_t n = 0; n < batch.size(); ++n) {
    const auto& item = batch.items[n];
    if (item.rows() == 0) throw ValidationError("cannot pool an empty sequence");
    out.rows.row(static_cast<Eigen::Index>(n)) = item.colwise().mean();
  }
  return out;
}

Vector bridge_gradient(const LinearBridge& bridge, const EmbeddingBatch& inputs,
                       std::span<const Matrix> grad_projected) {
  if (grad_projected.size() != inputs.size()) {
    throw ValidationError("one projected-gradient matrix is needed per item");
  }
  Matrix grad_w = Matrix::Zero(bridge.out_dim(), bridge.in_dim());
  Vector grad_b = Vector::Zero(bridge.has_bias() ? bridge.out_dim() : 0);
  for (std::size_t n = 0; n < inputs.size(); ++n) {
    const auto& x = inputs.items[n];
    const auto& g = grad_projected[n];
    if (g.rows() != x.rows() || g.cols() != bridge.out_dim()) {
      throw ValidationError("projected-gradient shape mismatch");
    }
    grad_w.noalias() += g.transpose() * x;
    if (bridge.has_bias()) grad_b += g.colwise().sum().transpose();
  }
  Vector flat(bridge.parameter_count());
  flat.head(grad_w.size()) = Eigen::Map<const Vector>(grad_w.data(), grad_w.size());
  if (bridge.has_bias()) flat.tail(grad_b.size()) = grad_b;
  return flat;
}

}  // namespace otbridge
