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

#include "otbridge/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "otbridge/evaluation.hpp"

namespace otbridge {

std::string to_string(CentralSpace c) {
  switch (c) {
    case CentralSpace::words: return "words";
    case CentralSpace::equipartition: return "equipartition";
    case CentralSpace::prototypes: return "prototypes";
  }
  return "words";
}

CentralSpace central_space_from_string(const std::string& s) {
  if (s == "words") return CentralSpace::words;
  if (s == "equipartition") return CentralSpace::equipartition;
  if (s == "prototypes") return CentralSpace::prototypes;
  throw ValidationError("unknown central space '" + s +
                        "' (expected words, equipartition or prototypes)");
}

void PairedDataset::validate(Eigen::Index anchor_dim, Eigen::Index vocab_size) const {
  if (visual.size() == 0) throw ValidationError("dataset is empty");
  if (text.size() != visual.size() || captions.size() != visual.size()) {
    throw ValidationError("visual, text and caption counts differ");
  }
  (void)visual.dim();
  if (text.dim() != anchor_dim) {
    throw ValidationError("dimension mismatch: text features must live in the anchor space");
  }
  for (std::size_t n = 0; n < size(); ++n) {
    if (visual.items[n].rows() == 0 || text.items[n].rows() == 0) {
      throw ValidationError("item " + std::to_string(n) + " has an empty sequence");
    }
    if (captions[n].empty()) throw ValidationError("item " + std::to_string(n) + " has no caption");
    for (const int id : captions[n]) {
      if (id < 0 || id >= vocab_size) {
        throw ValidationError("caption token id " + std::to_string(id) + " out of vocabulary");
      }
    }
  }
}

PairedDataset PairedDataset::subset(std::span<const std::size_t> indices) const {
  PairedDataset out;
  out.visual.items.reserve(indices.size());
  out.text.items.reserve(indices.size());
  out.captions.reserve(indices.size());
  for (const auto i : indices) {
    out.visual.items.push_back(visual.items.at(i));
    out.text.items.push_back(text.items.at(i));
    out.captions.push_back(captions.at(i));
  }
  return out;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("lr must be positive");
  if (total_steps < 1) throw ValidationError("total_steps must be at least 1");
  if (warmup_steps < 0 || warmup_steps > total_steps) {
    throw ValidationError("warmup_steps must lie in [0, total_steps]");
  }
  if (batch_size < 1) throw ValidationError("batch_size must be at least 1");
  if (!(adamw.beta1 >= 0.0 && adamw.beta1 < 1.0) || !(adamw.beta2 >= 0.0 && adamw.beta2 < 1.0)) {
    throw ValidationError("AdamW betas must lie in [0, 1)");
  }
  if (!(adamw.eps > 0.0)) throw ValidationError("adamw_eps must be positive");
  if (!(adamw.weight_decay >= 0.0)) throw ValidationError("weight_decay must be >= 0");
  if (num_prototypes < 1) throw ValidationError("num_prototypes must be at least 1");
  if (gap_every < 1) throw ValidationError("gap_every must be at least 1");
  solver.validate();
  loss.validate(true);
}

PooledBatch pooled_visual(const LinearBridge& bridge, const PairedDataset& data) {
  return pool(project(bridge, data.visual));
}

PooledBatch pooled_text(const PairedDataset& data) { return pool(data.text); }

BatchAssignments compute_assignments(const LinearBridge& bridge, const PairedDataset& batch,
                                     const Matrix& central, bool normalize,
                                     const Vector& row_marginal, const SolverConfig& cfg) {
  const auto b = static_cast<Eigen::Index>(batch.size());
  const Vector col = Vector::Constant(b, 1.0 / static_cast<double>(b));
  const auto pv = pooled_visual(bridge, batch);
  const auto pt = pooled_text(batch);
  return {sinkhorn(score_matrix(central, pv, normalize), row_marginal, col, cfg),
          sinkhorn(score_matrix(central, pt, normalize), row_marginal, col, cfg)};
}

BatchEvaluation evaluate_batch(const LinearBridge& bridge, const PairedDataset& batch,
                               const Matrix& central, bool normalize,
                               const FrozenDecoder& decoder, const TrainConfig& cfg,
                               const BatchAssignments& assignments, const ItmHead* itm_head) {
  const auto projected = project(bridge, batch.visual);
  const auto pv = pool(projected);
  const auto pt = pooled_text(batch);
  const auto& lc = cfg.loss;

  std::vector<LossValue> parts;
  if (lc.lambda_map > 0.0) {
    parts.push_back(assignment_prediction_loss(assignments.visual, assignments.text, pv, pt,
                                               central, lc.tau, normalize,
                                               cfg.central == CentralSpace::prototypes));
  }
  if (lc.lambda_cap > 0.0) {
    parts.push_back(caption_loss(decoder, projected.items, cfg.prefix_ids, batch.captions));
  }
  const bool pairwise_ok = pv.size() >= 2;
  if (lc.lambda_itc > 0.0 && pairwise_ok) parts.push_back(itc_loss(pv, pt, lc.itc_temperature));
  if (lc.lambda_itm > 0.0 && pairwise_ok) {
    if (itm_head == nullptr) throw ValidationError("ITM loss requested without a head");
    parts.push_back(itm_loss(pv, pt, *itm_head));
  }

  BatchEvaluation out;
  out.loss = total_loss(parts, lc);

  std::vector<Matrix> grad_projected;
  grad_projected.reserve(batch.size());
  for (std::size_t n = 0; n < batch.size(); ++n) {
    const auto& item = projected.items[n];
    Matrix g = out.loss.grad_prompts.empty() ? Matrix::Zero(item.rows(), item.cols())
                                             : out.loss.grad_prompts[n];
    if (out.loss.grad_pooled_v.size() > 0) {
      g.rowwise() += out.loss.grad_pooled_v.row(static_cast<Eigen::Index>(n)) /
                     static_cast<double>(item.rows());
    }
    grad_projected.push_back(std::move(g));
  }
  out.bridge_grad = bridge_gradient(bridge, batch.visual, grad_projected);
  out.central_grad = out.loss.grad_central;
  out.itm_head_grad = out.loss.grad_itm_head;
  return out;
}

namespace {

Vector flatten(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Vector flatten(const ItmHead& h) {
  Vector v(h.weight.size() + h.bias.size());
  v << flatten(h.weight), h.bias;
  return v;
}

void unflatten(const Vector& v, ItmHead& h) {
  h.weight = Eigen::Map<const Matrix>(v.data(), h.weight.rows(), h.weight.cols());
  h.bias = v.tail(h.bias.size());
}

}  // namespace

TrainResult train(const PairedDataset& dataset, const WordAnchorSpace& space,
                  const FrozenDecoder& decoder, const TrainConfig& cfg, const MetricsSink& sink) {
  cfg.validate();
  dataset.validate(space.dim(), space.size());
  if (decoder.dim() != space.dim()) {
    throw ValidationError("decoder dimension does not match the anchor space");
  }
  for (const int id : cfg.prefix_ids) {
    if (id < 0 || id >= space.size()) throw ValidationError("prefix token id out of vocabulary");
  }

  const Eigen::Index d = space.dim();
  const Eigen::Index dv = dataset.visual.dim();
  const bool normalize = space.normalized();

  TrainResult result;
  result.bridge = LinearBridge::initialize(d, dv, cfg.use_bias, cfg.seed);

  Matrix central = space.weights();
  Vector row_marginal = space.mu();
  if (cfg.central != CentralSpace::words) {
    if (cfg.central == CentralSpace::prototypes) {
      result.prototypes = PrototypeSpace::random(cfg.num_prototypes, d, cfg.seed + 0x9e3779b9ULL);
      central = result.prototypes->prototypes;
    }
    row_marginal = Vector::Constant(central.rows(), 1.0 / static_cast<double>(central.rows()));
  }
  if (cfg.loss.lambda_itm > 0.0) result.itm_head = ItmHead::random(d, cfg.seed + 0x51ed27ULL);

  auto bridge_state = AdamWState::zeros(result.bridge.parameter_count());
  auto proto_state = AdamWState::zeros(result.prototypes ? central.size() : 0);
  auto head_state =
      AdamWState::zeros(result.itm_head ? result.itm_head->weight.size() + 2 : 0);

  const PooledBatch all_text = pooled_text(dataset);
  std::mt19937_64 shuffle_rng(cfg.seed + 1);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();
  const auto batch_size = static_cast<std::size_t>(cfg.batch_size);

  for (std::int64_t s = 0; s < cfg.total_steps; ++s) {
    if (cursor >= order.size()) {
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      cursor = 0;
    }
    const std::size_t end = std::min(order.size(), cursor + batch_size);
    const auto batch =
        dataset.subset(std::span<const std::size_t>(order.data() + cursor, end - cursor));
    cursor = end;

    StepMetrics m;
    m.step = s + 1;
    m.lr = lr_at(s, cfg.lr, cfg.warmup_steps, cfg.total_steps);

    BatchAssignments assignments;
    if (cfg.loss.lambda_map > 0.0) {
      assignments = compute_assignments(result.bridge, batch, central, normalize, row_marginal,
                                        cfg.solver);
      m.marginal_error =
          std::max(assignments.visual.marginal_error, assignments.text.marginal_error);
      m.sinkhorn_iterations =
          std::max(assignments.visual.iterations_used, assignments.text.iterations_used);
    }
    const auto eval = evaluate_batch(result.bridge, batch, central, normalize, decoder, cfg,
                                     assignments,
                                     result.itm_head ? &*result.itm_head : nullptr);
    m.loss = eval.loss.total;
    m.components = eval.loss.components;
    if (!std::isfinite(m.loss)) {
      m.loss = std::numeric_limits<double>::quiet_NaN();
      if (sink) sink(m);
      result.log.push_back(m);
      throw RuntimeError("non-finite loss at step " + std::to_string(m.step));
    }

    Vector params = result.bridge.parameters();
    adamw_step(params, eval.bridge_grad, bridge_state, m.step, m.lr, cfg.adamw);
    result.bridge.set_parameters(params);

    if (result.prototypes && eval.central_grad.size() > 0) {
      Vector p = flatten(result.prototypes->prototypes);
      adamw_step(p, flatten(eval.central_grad), proto_state, m.step, m.lr, cfg.adamw);
      result.prototypes->prototypes = Eigen::Map<const Matrix>(p.data(), central.rows(), d);
      result.prototypes->renormalize();
      central = result.prototypes->prototypes;
    }
    if (result.itm_head && eval.itm_head_grad) {
      Vector h = flatten(*result.itm_head);
      adamw_step(h, flatten(*eval.itm_head_grad), head_state, m.step, m.lr, cfg.adamw);
      unflatten(h, *result.itm_head);
    }

    if (m.step % cfg.gap_every == 0 || m.step == cfg.total_steps) {
      m.gap_norm =
          modality_gap(pooled_visual(result.bridge, dataset), all_text, space.normalized()).norm;
    }
    if (sink) sink(m);
    result.log.push_back(std::move(m));
  }
  return result;
}

}  // namespace otbridge
