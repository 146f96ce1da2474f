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

#include "otbridge/losses.hpp"

#include <cmath>
#include <random>
#include <string>

namespace otbridge {
namespace {

// Row-wise log-softmax with max subtraction.
Matrix log_softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    out.row(i) = logits.row(i).array() - lse;
  }
  return out;
}

Vector log_softmax(const Vector& logits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return logits.array() - lse;
}

// Pulls a gradient taken w.r.t. normalized rows back to the raw rows:
// d/dz = (I - zh zh^T) g / |z|.
Matrix normalize_rows_backward(const Matrix& raw, const Matrix& grad_normalized) {
  Matrix out(raw.rows(), raw.cols());
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    const double n = raw.row(i).norm();
    const RowVector unit = raw.row(i) / n;
    const RowVector g = grad_normalized.row(i);
    out.row(i) = (g - g.dot(unit) * unit) / n;
  }
  return out;
}

// Transposed plan with every column rescaled to a distribution (B x K).
Matrix column_distributions(const AssignmentMatrix& q) {
  const RowVector mass = q.plan.colwise().sum();
  if ((mass.array() <= 0.0).any()) throw ValidationError("assignment column has no mass");
  return (q.plan.array().rowwise() / mass.array()).matrix().transpose();
}

void require_batch(const PooledBatch& v, const PooledBatch& t, Eigen::Index min_items) {
  if (v.size() != t.size() || v.dim() != t.dim()) {
    throw ValidationError("visual and text batches must have matching shapes");
  }
  if (v.size() < min_items) {
    throw ValidationError("batch needs at least " + std::to_string(min_items) + " items");
  }
}

LossValue single(const char* name, double value) {
  LossValue out;
  out.total = value;
  out.components[name] = value;
  return out;
}

}  // namespace

void LossConfig::validate(bool for_training) const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be positive");
  if (!(itc_temperature > 0.0)) throw ValidationError("itc_temperature must be positive");
  for (const double l : {lambda_map, lambda_cap, lambda_itc, lambda_itm}) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw ValidationError("loss weights must be >= 0");
  }
  if (for_training && !(lambda_map + lambda_cap > 0.0)) {
    throw ValidationError("lambda_map + lambda_cap must be positive");
  }
}

double LossConfig::weight(const std::string& component) const {
  if (component == kMapLoss) return lambda_map;
  if (component == kCapLoss) return lambda_cap;
  if (component == kItcLoss) return lambda_itc;
  if (component == kItmLoss) return lambda_itm;
  throw ValidationError("unknown loss component '" + component + "'");
}

ItmHead ItmHead::zeros(Eigen::Index dim) {
  return {Matrix::Zero(2, 2 * dim), Vector::Zero(2)};
}

ItmHead ItmHead::random(Eigen::Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(2 * dim));
  std::uniform_real_distribution<double> uniform(-bound, bound);
  ItmHead head = zeros(dim);
  head.weight = Matrix::NullaryExpr(2, 2 * dim, [&] { return uniform(rng); });
  return head;
}

Matrix word_probs(const PooledBatch& pooled, const Matrix& central, double tau, bool normalize) {
  if (!(tau > 0.0)) throw ValidationError("tau must be positive");
  if (pooled.dim() != central.cols()) throw ValidationError("dimension mismatch");
  const Matrix z = normalize ? normalize_rows(pooled.rows) : pooled.rows;
  const Matrix w = normalize ? normalize_rows(central) : central;
  return log_softmax_rows(z * w.transpose() / tau).array().exp();
}

Matrix word_probs(const PooledBatch& pooled, const WordAnchorSpace& space, double tau) {
  return word_probs(pooled, space.weights(), tau, space.normalized());
}

LossValue assignment_prediction_loss(const AssignmentMatrix& q_v, const AssignmentMatrix& q_t,
                                     const PooledBatch& pooled_v, const PooledBatch& pooled_t,
                                     const Matrix& central, double tau, bool normalize,
                                     bool central_grad) {
  if (!(tau > 0.0)) throw ValidationError("tau must be positive");
  require_batch(pooled_v, pooled_t, 1);
  const Eigen::Index b = pooled_v.size();
  const Eigen::Index k = central.rows();
  if (central.cols() != pooled_v.dim()) throw ValidationError("dimension mismatch");
  for (const auto* q : {&q_v, &q_t}) {
    if (q->plan.rows() != k || q->plan.cols() != b) {
      throw ValidationError("assignment shape does not match batch and central space");
    }
  }

  const Matrix zv = normalize ? normalize_rows(pooled_v.rows) : pooled_v.rows;
  const Matrix zt = normalize ? normalize_rows(pooled_t.rows) : pooled_t.rows;
  const Matrix w = normalize ? normalize_rows(central) : central;
  const Matrix log_pv = log_softmax_rows(zv * w.transpose() / tau);
  const Matrix log_pt = log_softmax_rows(zt * w.transpose() / tau);
  const Matrix target_t = column_distributions(q_t);
  const Matrix target_v = column_distributions(q_v);

  const double bd = static_cast<double>(b);
  const double loss =
      -((target_t.array() * log_pv.array()).sum() + (target_v.array() * log_pt.array()).sum()) /
      bd;

  LossValue out = single(kMapLoss, loss);
  // d loss / d score for each term, scores = z . w / tau.
  const Matrix grad_score_v = (log_pv.array().exp().matrix() - target_t) / (bd * tau);
  const Matrix grad_zv = grad_score_v * w;
  out.grad_pooled_v = normalize ? normalize_rows_backward(pooled_v.rows, grad_zv) : grad_zv;

  if (central_grad) {
    const Matrix grad_score_t = (log_pt.array().exp().matrix() - target_v) / (bd * tau);
    const Matrix grad_w = grad_score_v.transpose() * zv + grad_score_t.transpose() * zt;
    out.grad_central = normalize ? normalize_rows_backward(central, grad_w) : grad_w;
  }
  return out;
}

LossValue assignment_prediction_loss(const AssignmentMatrix& q_v, const AssignmentMatrix& q_t,
                                     const PooledBatch& pooled_v, const PooledBatch& pooled_t,
                                     const WordAnchorSpace& space, double tau) {
  return assignment_prediction_loss(q_v, q_t, pooled_v, pooled_t, space.weights(), tau,
                                    space.normalized());
}

LossValue caption_loss(const FrozenDecoder& decoder, std::span<const Matrix> prompts,
                       std::span<const int> prefix_ids,
                       std::span<const std::vector<int>> target_ids) {
  if (prompts.size() != target_ids.size() || prompts.empty()) {
    throw ValidationError("caption loss needs one target sequence per prompt set");
  }
  const double bd = static_cast<double>(prompts.size());
  const Eigen::Index vocab = decoder.vocab_size();
  for (const int id : prefix_ids) {
    if (id < 0 || id >= vocab) {
      throw ValidationError("prefix token id " + std::to_string(id) + " out of vocabulary");
    }
  }

  double loss = 0.0;
  std::vector<Matrix> grads;
  grads.reserve(prompts.size());
  std::vector<int> context;
  for (std::size_t n = 0; n < prompts.size(); ++n) {
    const auto& targets = target_ids[n];
    if (targets.empty()) throw ValidationError("caption target sequence is empty");
    const double steps = static_cast<double>(targets.size());
    context.assign(prefix_ids.begin(), prefix_ids.end());
    Matrix grad = Matrix::Zero(prompts[n].rows(), prompts[n].cols());
    for (const int target : targets) {
      if (target < 0 || target >= vocab) {
        throw ValidationError("token id " + std::to_string(target) + " out of vocabulary");
      }
      const Vector log_p = log_softmax(decoder.logits(prompts[n], context));
      loss -= log_p(target) / (steps * bd);
      Vector upstream = log_p.array().exp();
      upstream(target) -= 1.0;
      upstream /= steps * bd;
      grad += decoder.logits_vjp(prompts[n], context, upstream);
      context.push_back(target);
    }
    grads.push_back(std::move(grad));
  }

  LossValue out = single(kCapLoss, loss);
  out.grad_prompts = std::move(grads);
  return out;
}

LossValue itc_loss(const PooledBatch& pooled_v, const PooledBatch& pooled_t, double temperature) {
  if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
  require_batch(pooled_v, pooled_t, 2);
  const Eigen::Index b = pooled_v.size();
  const double bd = static_cast<double>(b);
  const Matrix v = normalize_rows(pooled_v.rows);
  const Matrix t = normalize_rows(pooled_t.rows);
  const Matrix logits = v * t.transpose() / temperature;

  const Matrix log_rows = log_softmax_rows(logits);                              // image -> text
  const Matrix log_cols = log_softmax_rows(logits.transpose()).transpose();      // text -> image
  const double loss = -0.5 * (log_rows.diagonal().sum() + log_cols.diagonal().sum()) / bd;

  const Matrix eye = Matrix::Identity(b, b);
  const Matrix grad_logits =
      0.5 * ((log_rows.array().exp().matrix() - eye) + (log_cols.array().exp().matrix() - eye)) /
      bd;
  const Matrix grad_v = grad_logits * t / temperature;

  LossValue out = single(kItcLoss, loss);
  out.grad_pooled_v = normalize_rows_backward(pooled_v.rows, grad_v);
  return out;
}

LossValue itm_loss(const PooledBatch& pooled_v, const PooledBatch& pooled_t, const ItmHead& head) {
  require_batch(pooled_v, pooled_t, 2);
  const Eigen::Index b = pooled_v.size();
  const Eigen::Index d = pooled_v.dim();
  if (head.weight.rows() != 2 || head.weight.cols() != 2 * d || head.bias.size() != 2) {
    throw ValidationError("ITM head shape does not match the pooled dimension");
  }
  const Matrix sim = normalize_rows(pooled_v.rows) * normalize_rows(pooled_t.rows).transpose();

  struct Example {
    Eigen::Index image;
    Eigen::Index text;
    int label;
  };
  std::vector<Example> examples;
  examples.reserve(static_cast<std::size_t>(3 * b));
  for (Eigen::Index n = 0; n < b; ++n) examples.push_back({n, n, 1});
  for (Eigen::Index i = 0; i < b; ++i) {
    Eigen::Index hardest = -1;
    for (Eigen::Index j = 0; j < b; ++j) {
      if (j != i && (hardest < 0 || sim(i, j) > sim(i, hardest))) hardest = j;
    }
    examples.push_back({i, hardest, 0});
  }
  for (Eigen::Index j = 0; j < b; ++j) {
    Eigen::Index hardest = -1;
    for (Eigen::Index i = 0; i < b; ++i) {
      if (i != j && (hardest < 0 || sim(i, j) > sim(hardest, j))) hardest = i;
    }
    examples.push_back({hardest, j, 0});
  }

  const double count = static_cast<double>(examples.size());
  double loss = 0.0;
  ItmHead grad_head = ItmHead::zeros(d);
  Matrix grad_v = Matrix::Zero(b, d);
  Vector x(2 * d);
  for (const auto& ex : examples) {
    x << pooled_v.rows.row(ex.image).transpose(), pooled_t.rows.row(ex.text).transpose();
    const Vector log_p = log_softmax(head.weight * x + head.bias);
    loss -= log_p(ex.label) / count;
    Vector g = log_p.array().exp();
    g(ex.label) -= 1.0;
    g /= count;
    grad_head.weight += g * x.transpose();
    grad_head.bias += g;
    grad_v.row(ex.image) += (head.weight.leftCols(d).transpose() * g).transpose();
  }

  LossValue out = single(kItmLoss, loss);
  out.grad_pooled_v = std::move(grad_v);
  out.grad_itm_head = std::move(grad_head);
  return out;
}

namespace {

void accumulate(Matrix& into, const Matrix& g, double w) {
  if (g.size() == 0) return;
  if (into.size() == 0) {
    into = w * g;
  } else {
    if (into.rows() != g.rows() || into.cols() != g.cols()) {
      throw ValidationError("gradient shapes differ between loss components");
    }
    into += w * g;
  }
}

}  // namespace

LossValue total_loss(std::span<const LossValue> components, const LossConfig& cfg) {
  LossValue out;
  for (const auto& part : components) {
    if (part.components.size() != 1) {
      throw ValidationError("total_loss expects single-component loss values");
    }
    const auto& [name, value] = *part.components.begin();
    const double w = cfg.weight(name);
    out.components[name] = value;
    out.total += w * value;
    accumulate(out.grad_pooled_v, part.grad_pooled_v, w);
    accumulate(out.grad_central, part.grad_central, w);
    if (!part.grad_prompts.empty()) {
      if (out.grad_prompts.empty()) out.grad_prompts.resize(part.grad_prompts.size());
      if (out.grad_prompts.size() != part.grad_prompts.size()) {
        throw ValidationError("prompt gradient counts differ between loss components");
      }
      for (std::size_t n = 0; n < part.grad_prompts.size(); ++n) {
        accumulate(out.grad_prompts[n], part.grad_prompts[n], w);
      }
    }
    if (part.grad_itm_head) {
      ItmHead scaled{w * part.grad_itm_head->weight, w * part.grad_itm_head->bias};
      if (out.grad_itm_head) {
        out.grad_itm_head->weight += scaled.weight;
        out.grad_itm_head->bias += scaled.bias;
      } else {
        out.grad_itm_head = std::move(scaled);
      }
    }
  }
  return out;
}

}  // namespace otbridge
