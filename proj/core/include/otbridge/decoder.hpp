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
#include <span>
#include <vector>

#include "otbridge/anchors.hpp"
#include "otbridge/types.hpp"

namespace otbridge {

// A frozen next-token model conditioned on soft prompts. Implementations are
// immutable; the only differentiable input is the prompt matrix.
class FrozenDecoder {
 public:
  virtual ~FrozenDecoder() = default;

  [[nodiscard]] virtual Eigen::Index vocab_size() const = 0;
  [[nodiscard]] virtual Eigen::Index dim() const = 0;

  // Next-token logits given prompt vectors (one per row) followed by the
  // token context (text prefix, then previously generated tokens).
  [[nodiscard]] virtual Vector logits(const Matrix& prompts,
                                      std::span<const int> context_ids) const = 0;

  // Gradient of upstream . logits with respect to `prompts`.
  [[nodiscard]] virtual Matrix logits_vjp(const Matrix& prompts, std::span<const int> context_ids,
                                          const Vector& upstream) const = 0;
};

// One-layer stand-in for a frozen language model, tied to the anchor space:
//
//   c      = mean of {prompt rows, W[context_ids]}
//   logits = W tanh(M c)
//
// M is a fixed d x d matrix drawn as gain * (I + mixing * G / sqrt(d)) with
// G standard normal.
class ToyFrozenDecoder final : public FrozenDecoder {
 public:
  struct Options {
    double gain = 1.0;
    double mixing = 0.3;
    std::uint64_t seed = 0;
  };

  ToyFrozenDecoder(Matrix anchors, Matrix mixer);
  static ToyFrozenDecoder from_space(const WordAnchorSpace& space, const Options& options);

  [[nodiscard]] Eigen::Index vocab_size() const override { return anchors_.rows(); }
  [[nodiscard]] Eigen::Index dim() const override { return anchors_.cols(); }
  [[nodiscard]] const Matrix& mixer() const { return mixer_; }
  [[nodiscard]] const Matrix& anchors() const { return anchors_; }

  [[nodiscard]] Vector logits(const Matrix& prompts,
                              std::span<const int> context_ids) const override;
  [[nodiscard]] Matrix logits_vjp(const Matrix& prompts, std::span<const int> context_ids,
                                  const Vector& upstream) const override;

 private:
  [[nodiscard]] Vector context_mean(const Matrix& prompts, std::span<const int> context_ids) const;

  Matrix anchors_;  // K x d
  Matrix mixer_;    // d x d
};

// Free-function spelling of ToyFrozenDecoder::logits for a list of prompt
// vectors and previous tokens.
[[nodiscard]] Vector decoder_logits(const FrozenDecoder& decoder, const Matrix& prompts,
                                    std::span<const int> context_ids);

inline constexpr int kEndTokenId = 0;

// Greedy decoding: repeatedly appends the argmax token (lowest id on ties),
// stopping after max_len tokens or when kEndTokenId is produced (the end
// token is not included in the output). With `no_repeat`, tokens already
// emitted are excluded from the argmax.
[[nodiscard]] std::vector<int> greedy_decode(const FrozenDecoder& decoder, const Matrix& prompts,
                                             std::span<const int> prefix_ids, int max_len,
                                             bool no_repeat = false);

}  // namespace otbridge
