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

#include "otbridge/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "otbridge/io/embedding_file.hpp"

namespace otbridge {
namespace {

// Rows scaled to unit norm; zero rows stay zero (cosine 0 with everything).
Matrix unit_rows_or_zero(const Matrix& m) {
  Matrix out = m;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double n = out.row(i).norm();
    if (n > 0.0) out.row(i) /= n;
  }
  return out;
}

// Indices sorted by descending score, lower index first on ties.
std::vector<int> rank_descending(const Vector& scores) {
  std::vector<int> idx(static_cast<std::size_t>(scores.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return scores(a) > scores(b); });
  return idx;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

RetrievalResult t2i_retrieve(const PooledBatch& queries, const PooledBatch& gallery,
                             std::span<const int> ks) {
  if (gallery.size() == 0) throw ValidationError("empty gallery");
  if (queries.dim() != gallery.dim()) throw ValidationError("dimension mismatch");
  if (queries.size() > gallery.size()) {
    throw ValidationError("every query needs its paired gallery item");
  }
  const Matrix sims = unit_rows_or_zero(queries.rows) * unit_rows_or_zero(gallery.rows).transpose();

  RetrievalResult out;
  std::vector<int> positions;
  positions.reserve(static_cast<std::size_t>(queries.size()));
  for (Eigen::Index q = 0; q < queries.size(); ++q) {
    auto ranking = rank_descending(sims.row(q).transpose());
    positions.push_back(static_cast<int>(
        std::find(ranking.begin(), ranking.end(), static_cast<int>(q)) - ranking.begin()));
    out.rankings.push_back(std::move(ranking));
  }
  for (const int k : ks) {
    if (k < 1) throw ValidationError("recall cutoff must be >= 1");
    const auto hits = std::count_if(positions.begin(), positions.end(), [&](int p) { return p < k; });
    out.recall_at[k] = queries.size() == 0
                           ? 0.0
                           : static_cast<double>(hits) / static_cast<double>(queries.size());
  }
  return out;
}

CandidateRanking it2t_rank(const FrozenDecoder& decoder, const Matrix& prompts,
                           std::span<const int> question_ids,
                           std::span<const std::vector<int>> candidates) {
  if (candidates.empty()) throw ValidationError("no answer candidates");
  CandidateRanking out;
  std::vector<int> context;
  for (const auto& candidate : candidates) {
    if (candidate.empty()) throw ValidationError("empty answer candidate");
    context.assign(question_ids.begin(), question_ids.end());
    double nll = 0.0;
    for (const int token : candidate) {
      if (token < 0 || token >= decoder.vocab_size()) {
        throw ValidationError("token id " + std::to_string(token) + " out of vocabulary");
      }
      const Vector logits = decoder.logits(prompts, context);
      const double m = logits.maxCoeff();
      nll -= logits(token) - m - std::log((logits.array() - m).exp().sum());
      context.push_back(token);
    }
    out.losses.push_back(nll / static_cast<double>(candidate.size()));
  }
  for (std::size_t i = 1; i < out.losses.size(); ++i) {
    if (out.losses[i] < out.losses[static_cast<std::size_t>(out.best)]) {
      out.best = static_cast<int>(i);
    }
  }
  return out;
}

GapReport modality_gap(const PooledBatch& pooled_v, const PooledBatch& pooled_t,
                       bool normalize) {
  if (pooled_v.size() != pooled_t.size()) throw ValidationError("count mismatch");
  if (pooled_v.size() == 0) throw ValidationError("modality gap needs at least one pair");
  if (pooled_v.dim() != pooled_t.dim()) throw ValidationError("dimension mismatch");
  GapReport r;
  if (normalize) {
    r.centroid_visual = normalize_rows(pooled_v.rows).colwise().mean().transpose();
    r.centroid_text = normalize_rows(pooled_t.rows).colwise().mean().transpose();
  } else {
    r.centroid_visual = pooled_v.rows.colwise().mean().transpose();
    r.centroid_text = pooled_t.rows.colwise().mean().transpose();
  }
  r.delta = r.centroid_visual - r.centroid_text;
  r.norm = r.delta.norm();
  return r;
}

Vector semantic_arithmetic(std::span<const SignedTerm> terms, bool normalize) {
  if (terms.empty()) throw ValidationError("semantic arithmetic needs at least one term");
  Vector out = Vector::Zero(terms.front().vector.size());
  for (const auto& term : terms) {
    if (term.sign != 1 && term.sign != -1) throw ValidationError("term sign must be +1 or -1");
    if (term.vector.size() != out.size()) throw ValidationError("dimension mismatch");
    out += static_cast<double>(term.sign) * term.vector;
  }
  if (normalize && out.norm() > 0.0) out.normalize();
  return out;
}

std::vector<AnchorMatch> nearest_anchors(const Vector& query, const WordAnchorSpace& space,
                                         Eigen::Index k, std::span<const Eigen::Index> exclude) {
  if (k < 1 || k > space.size()) throw ValidationError("k must lie in [1, K]");
  if (query.size() != space.dim()) throw ValidationError("dimension mismatch");
  const Matrix anchors = unit_rows_or_zero(space.weights());
  const double qn = query.norm();
  Vector sims = qn > 0.0 ? Vector(anchors * (query / qn)) : Vector::Zero(space.size());
  const auto ranking = rank_descending(sims);

  std::vector<AnchorMatch> out;
  for (const int idx : ranking) {
    if (static_cast<Eigen::Index>(out.size()) == k) break;
    if (std::find(exclude.begin(), exclude.end(), idx) != exclude.end()) continue;
    out.push_back({idx, space.vocab()[static_cast<std::size_t>(idx)], sims(idx)});
  }
  return out;
}

std::vector<std::vector<WordMass>> top_words_per_item(const AssignmentMatrix& q,
                                                      const std::vector<std::string>& vocab,
                                                      Eigen::Index k) {
  if (static_cast<Eigen::Index>(vocab.size()) != q.plan.rows()) {
    throw ValidationError("vocab size does not match the assignment rows");
  }
  if (k < 1 || k > q.plan.rows()) throw ValidationError("k must lie in [1, K]");
  std::vector<std::vector<WordMass>> out;
  for (Eigen::Index j = 0; j < q.plan.cols(); ++j) {
    const auto ranking = rank_descending(q.plan.col(j));
    std::vector<WordMass> words;
    for (Eigen::Index r = 0; r < k; ++r) {
      const int idx = ranking[static_cast<std::size_t>(r)];
      words.push_back({idx, vocab[static_cast<std::size_t>(idx)], q.plan(idx, j)});
    }
    out.push_back(std::move(words));
  }
  return out;
}

Matrix pca_2d(const Matrix& rows) {
  if (rows.rows() == 0) throw ValidationError("PCA needs at least one row");
  const Matrix centered = rows.rowwise() - rows.colwise().mean();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(rows.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Eigen::Index d = rows.cols();
  Matrix basis = Matrix::Zero(d, 2);
  for (Eigen::Index c = 0; c < std::min<Eigen::Index>(2, d); ++c) {
    Vector v = eig.eigenvectors().col(d - 1 - c);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    basis.col(c) = v;
  }
  return centered * basis;
}

void write_rankings_csv(const std::filesystem::path& path, const RetrievalResult& result,
                        int top) {
  std::string out = "query_id,rank,gallery_id\n";
  for (std::size_t q = 0; q < result.rankings.size(); ++q) {
    const auto& ranking = result.rankings[q];
    const auto n = std::min<std::size_t>(ranking.size(), static_cast<std::size_t>(std::max(top, 0)));
    for (std::size_t r = 0; r < n; ++r) {
      out += std::to_string(q) + "," + std::to_string(r + 1) + "," + std::to_string(ranking[r]) +
             "\n";
    }
  }
  io::atomic_write(path, out);
}

void write_gap_csv(const std::filesystem::path& path, const PooledBatch& pooled_v,
                   const PooledBatch& pooled_t) {
  if (pooled_v.size() != pooled_t.size()) throw ValidationError("count mismatch");
  Matrix stacked(pooled_v.size() + pooled_t.size(), pooled_v.dim());
  stacked << pooled_v.rows, pooled_t.rows;
  const Matrix xy = pca_2d(stacked);
  std::string out = "item_id,modality,x,y\n";
  for (Eigen::Index i = 0; i < stacked.rows(); ++i) {
    const bool visual = i < pooled_v.size();
    const Eigen::Index item = visual ? i : i - pooled_v.size();
    out += std::to_string(item) + (visual ? ",visual," : ",text,") + format_double(xy(i, 0)) +
           "," + format_double(xy(i, 1)) + "\n";
  }
  io::atomic_write(path, out);
}

void write_neighbors_csv(const std::filesystem::path& path,
                         const std::vector<AnchorMatch>& matches) {
  std::string out = "rank,index,token,similarity\n";
  for (std::size_t r = 0; r < matches.size(); ++r) {
    out += std::to_string(r + 1) + "," + std::to_string(matches[r].index) + "," +
           matches[r].token + "," + format_double(matches[r].similarity) + "\n";
  }
  io::atomic_write(path, out);
}

}  // namespace otbridge
