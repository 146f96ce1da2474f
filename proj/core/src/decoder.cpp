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

#include "otbridge/decoder.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace otbridge {

ToyFrozenDecoder::ToyFrozenDecoder(Matrix anchors, Matrix mixer)
    : anchors_(std::move(anchors)), mixer_(std::move(mixer)) {
  if (anchors_.rows() == 0 || anchors_.cols() == 0) {
    throw ValidationError("decoder needs a non-empty anchor matrix");
  }
  if (mixer_.rows() != anchors_.cols() || mixer_.cols() != anchors_.cols()) {
    throw ValidationError("decoder mixer must be d x d with d the anchor dimension");
  }
}

ToyFrozenDecoder ToyFrozenDecoder::from_space(const WordAnchorSpace& space,
                                              const Options& options) {
  const Eigen::Index d = space.dim();
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Matrix noise = Matrix::NullaryExpr(d, d, [&] { return normal(rng); });
  Matrix mixer = options.gain * (Matrix::Identity(d, d) +
                                 (options.mixing / std::sqrt(static_cast<double>(d))) * noise);
  return ToyFrozenDecoder(space.weights(), std::move(mixer));
}

Vector ToyFrozenDecoder::context_mean(const Matrix& prompts,
                                      std::span<const int> context_ids) const {
  const Eigen::Index n = prompts.rows() + static_cast<Eigen::Index>(context_ids.size());
  if (n == 0) throw ValidationError("decoder context is empty");
  if (prompts.rows() > 0 && prompts.cols() != dim()) {
    throw ValidationError("prompt dimension does not match decoder dimension");
  }
  Vector c = Vector::Zero(dim());
  if (prompts.rows() > 0) c += prompts.colwise().sum().transpose();
  for (const int id : context_ids) {
    if (id < 0 || id >= vocab_size()) {
      throw ValidationError("token id " + std::to_string(id) + " out of vocabulary");
    }
    c += anchors_.row(id).transpose();
  }
  return c / static_cast<double>(n);
}

Vector ToyFrozenDecoder::logits(const Matrix& prompts, std::span<const int> context_ids) const {
  const Vector hidden = (mixer_ * context_mean(prompts, context_ids)).array().tanh();
  return anchors_ * hidden;
}

Matrix ToyFrozenDecoder::logits_vjp(const Matrix& prompts, std::span<const int> context_ids,
                                    const Vector& upstream) const {
  if (upstream.size() != vocab_size()) throw ValidationError("upstream gradient has wrong size");
  const Vector hidden = (mixer_ * context_mean(prompts, context_ids)).array().tanh();
  const Vector grad_pre =
      (anchors_.transpose() * upstream).cwiseProduct((1.0 - hidden.array().square()).matrix());
  const Eigen::Index n = prompts.rows() + static_cast<Eigen::Index>(context_ids.size());
  const RowVector grad_row = (mixer_.transpose() * grad_pre).transpose() / static_cast<double>(n);
  return grad_row.replicate(prompts.rows(), 1);
}

Vector decoder_logits(const FrozenDecoder& decoder, const Matrix& prompts,
                      std::span<const int> context_ids) {
  return decoder.logits(prompts, context_ids);
}

std::vector<int> greedy_decode(const FrozenDecoder& decoder, const Matrix& prompts,
                               std::span<const int> prefix_ids, int max_len, bool no_repeat) {
  if (max_len < 1) throw ValidationError("max_len must be at least 1");
  std::vector<int> context(prefix_ids.begin(), prefix_ids.end());
  std::vector<int> generated;
  for (int step = 0; step < max_len; ++step) {
    Vector logits = decoder.logits(prompts, context);
    if (no_repeat) {
      for (const int id : generated) logits(id) = -std::numeric_limits<double>::infinity();
    }
    int best = 0;
    for (Eigen::Index k = 1; k < logits.size(); ++k) {
      if (logits(k) > logits(best)) best = static_cast<int>(k);
    }
    if (best == kEndTokenId) break;
    generated.push_back(best);
    context.push_back(best);
  }
  return generated;
}

}  // namespace otbridge
