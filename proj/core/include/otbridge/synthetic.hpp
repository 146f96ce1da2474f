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
#include <string>
#include <vector>

#include "otbridge/anchors.hpp"
#include "otbridge/trainer.hpp"

namespace otbridge {

// Ids 0..3 of every synthetic vocabulary are reserved: the end token and the
// "A photo of" prefix. Concepts are drawn from the remaining ids.
inline constexpr int kReservedTokens = 4;
inline const std::vector<std::string> kReservedVocab = {"</s>", "A", "photo", "of"};

struct SyntheticSpec {
  Eigen::Index visual_dim = 24;   // d_v
  Eigen::Index anchor_dim = 16;   // d
  Eigen::Index vocab_size = 200;  // K
  std::size_t train_items = 512;
  std::size_t heldout_items = 100;
  int concepts_per_item = 3;      // also the number of visual patches
  double noise_sigma = 0.05;
  double zipf_s = 1.0;
  // Norm of a constant visual offset lying in the null space of the planted
  // map; the planted map ignores it, an untrained bridge does not.
  double visual_offset = 3.0;
  std::uint64_t seed = 42;

  void validate() const;
};

struct SyntheticData {
  WordAnchorSpace space;
  TokenCounts counts;
  PairedDataset train;
  PairedDataset heldout;
  Matrix planted_map;    // d x d_v with orthonormal rows
  Vector visual_offset;  // length d_v, planted_map * visual_offset = 0
};

// Zipf(s) weights over the non-reserved ids, normalized; reserved ids get 0.
[[nodiscard]] Vector zipf_marginal(Eigen::Index vocab_size, double s);

// Text rows are exact anchor rows of the caption tokens; each visual patch is
// planted_map^T (w_c + noise_sigma * g) + visual_offset, so planted_map
// applied to the pooled patches equals the pooled text plus pooled noise.
// The word marginal is estimated from the training captions. No two held-out
// items share a concept set.
[[nodiscard]] SyntheticData generate_synthetic(const SyntheticSpec& spec);

// The planted map installed as a bias-free bridge (the oracle upper bound).
[[nodiscard]] LinearBridge planted_bridge(const SyntheticData& data);

// Semantic-arithmetic probes: single-concept visual items a, b, c and a
// planted target anchor, appended to the vocabulary, whose embedding is the
// unit vector along w_a - w_b + w_c.
struct ArithmeticProbe {
  int a = 0;
  int b = 0;
  int c = 0;
  int target = 0;  // index into the extended space
  Matrix visual_a, visual_b, visual_c;  // 1 x d_v each
};

struct ArithmeticSuite {
  WordAnchorSpace extended_space;
  std::vector<ArithmeticProbe> probes;
};

// Builds `trials` probes over the concepts of `data` using its planted map
// (noiseless visual features).
[[nodiscard]] ArithmeticSuite generate_arithmetic_suite(const SyntheticData& data, int trials,
                                                        std::uint64_t seed);

}  // namespace otbridge
