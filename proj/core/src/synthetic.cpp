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

#include "otbridge/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

namespace otbridge {
namespace {

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  return Matrix::NullaryExpr(rows, cols, [&] { return normal(rng); });
}

std::vector<std::string> synthetic_vocab(Eigen::Index k) {
  std::vector<std::string> vocab(kReservedVocab.begin(), kReservedVocab.end());
  for (Eigen::Index i = kReservedTokens; i < k; ++i) vocab.push_back("w" + std::to_string(i));
  return vocab;
}

// Distinct draws from `marginal` by rejection of repeats.
std::vector<int> draw_distinct(std::discrete_distribution<int>& dist, int count,
                               std::mt19937_64& rng) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    const int id = dist(rng);
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  }
  return out;
}

struct Planted {
  Matrix map;        // d x d_v, orthonormal rows
  Matrix null_basis; // (d_v - d) x d_v
};

Planted planted_map(Eigen::Index d, Eigen::Index dv, std::mt19937_64& rng) {
  const Matrix q = Eigen::HouseholderQR<Matrix>(gaussian(dv, dv, rng)).householderQ();
  return {q.leftCols(d).transpose(), q.rightCols(dv - d).transpose()};
}

}  // namespace

void SyntheticSpec::validate() const {
  if (visual_dim < 1 || anchor_dim < 1) throw ValidationError("degenerate dimensions");
  if (visual_dim < anchor_dim) {
    throw ValidationError("visual_dim must be >= anchor_dim for a right-invertible planted map");
  }
  if (vocab_size <= kReservedTokens) throw ValidationError("vocab_size too small");
  if (concepts_per_item < 1 || concepts_per_item > vocab_size - kReservedTokens) {
    throw ValidationError("concepts_per_item out of range");
  }
  if (train_items < 1) throw ValidationError("need at least one training item");
  if (!(noise_sigma >= 0.0) || !(zipf_s >= 0.0) || !(visual_offset >= 0.0)) {
    throw ValidationError("noise_sigma, zipf_s and visual_offset must be >= 0");
  }
}

Vector zipf_marginal(Eigen::Index vocab_size, double s) {
  if (vocab_size <= kReservedTokens) throw ValidationError("vocab_size too small");
  Vector p = Vector::Zero(vocab_size);
  for (Eigen::Index i = kReservedTokens; i < vocab_size; ++i) {
    p(i) = std::pow(static_cast<double>(i - kReservedTokens + 1), -s);
  }
  return p / p.sum();
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const Eigen::Index k = spec.vocab_size;
  const Eigen::Index d = spec.anchor_dim;
  const Eigen::Index dv = spec.visual_dim;

  const Matrix anchors = normalize_rows(gaussian(k, d, rng));
  const auto planted = planted_map(d, dv, rng);
  Vector offset = Vector::Zero(dv);
  if (dv > d && spec.visual_offset > 0.0) {
    const Vector coeffs = gaussian(dv - d, 1, rng);
    offset = planted.null_basis.transpose() * coeffs;
    offset *= spec.visual_offset / offset.norm();
  }

  const Vector zipf = zipf_marginal(k, spec.zipf_s);
  std::discrete_distribution<int> concept_dist(zipf.data(), zipf.data() + zipf.size());
  std::normal_distribution<double> normal(0.0, 1.0);

  // Held-out concept sets are kept distinct so that every query has a
  // unique correct match.
  constexpr int kMaxRedraws = 10000;
  auto make_items = [&](std::size_t count, bool distinct_sets) {
    PairedDataset data;
    std::set<std::vector<int>> seen;
    for (std::size_t n = 0; n < count; ++n) {
      auto concepts = draw_distinct(concept_dist, spec.concepts_per_item, rng);
      if (distinct_sets) {
        auto key = concepts;
        std::sort(key.begin(), key.end());
        int redraws = 0;
        while (!seen.insert(key).second) {
          if (++redraws > kMaxRedraws) {
            throw ValidationError("too few distinct concept sets for the held-out split");
          }
          concepts = draw_distinct(concept_dist, spec.concepts_per_item, rng);
          key = concepts;
          std::sort(key.begin(), key.end());
        }
      }
      Matrix text(spec.concepts_per_item, d);
      Matrix visual(spec.concepts_per_item, dv);
      for (int i = 0; i < spec.concepts_per_item; ++i) {
        const Vector w = anchors.row(concepts[static_cast<std::size_t>(i)]).transpose();
        text.row(i) = w.transpose();
        const Vector noise = Vector::NullaryExpr(d, [&] { return normal(rng); });
        visual.row(i) = (planted.map.transpose() * (w + spec.noise_sigma * noise) + offset)
                            .transpose();
      }
      data.visual.items.push_back(std::move(visual));
      data.text.items.push_back(std::move(text));
      data.captions.push_back(std::move(concepts));
    }
    return data;
  };

  auto train = make_items(spec.train_items, false);
  auto heldout = make_items(spec.heldout_items, true);

  auto vocab = synthetic_vocab(k);
  TokenCounts counts;
  for (const auto& caption : train.captions) {
    for (const int id : caption) ++counts.counts[vocab[static_cast<std::size_t>(id)]];
  }
  Vector mu = estimate_marginal(counts, vocab);

  return SyntheticData{
      WordAnchorSpace::create(anchors, std::move(vocab), std::move(mu), true),
      std::move(counts),
      std::move(train),
      std::move(heldout),
      planted.map,
      std::move(offset),
  };
}

LinearBridge planted_bridge(const SyntheticData& data) {
  LinearBridge b;
  b.weight = data.planted_map;
  return b;
}

ArithmeticSuite generate_arithmetic_suite(const SyntheticData& data, int trials,
                                          std::uint64_t seed) {
  if (trials < 1) throw ValidationError("need at least one arithmetic trial");
  const auto& space = data.space;
  const Eigen::Index k = space.size();
  if (k - kReservedTokens < 3) throw ValidationError("vocabulary too small for arithmetic");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(kReservedTokens, static_cast<int>(k) - 1);

  Matrix weights(k + trials, space.dim());
  weights.topRows(k) = space.weights();
  auto vocab = space.vocab();
  const Matrix map_t = data.planted_map.transpose();

  ArithmeticSuite suite;
  for (int t = 0; t < trials; ++t) {
    ArithmeticProbe probe;
    do {
      probe.a = pick(rng);
      probe.b = pick(rng);
      probe.c = pick(rng);
    } while (probe.a == probe.b || probe.a == probe.c || probe.b == probe.c);
    const Vector wa = space.weights().row(probe.a).transpose();
    const Vector wb = space.weights().row(probe.b).transpose();
    const Vector wc = space.weights().row(probe.c).transpose();
    weights.row(k + t) = (wa - wb + wc).normalized().transpose();
    vocab.push_back("target" + std::to_string(t));
    probe.target = static_cast<int>(k + t);
    probe.visual_a = (map_t * wa + data.visual_offset).transpose();
    probe.visual_b = (map_t * wb + data.visual_offset).transpose();
    probe.visual_c = (map_t * wc + data.visual_offset).transpose();
    suite.probes.push_back(std::move(probe));
  }
  const Eigen::Index total = k + trials;
  Vector mu = Vector::Constant(total, 1.0 / static_cast<double>(total));
  suite.extended_space =
      WordAnchorSpace::create(std::move(weights), std::move(vocab), std::move(mu), true);
  return suite;
}

}  // namespace otbridge
