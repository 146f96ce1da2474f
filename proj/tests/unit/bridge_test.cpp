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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "otbridge/bridge.hpp"
#include "otbridge/optim.hpp"
#include "otbridge/synthetic.hpp"
#include "otbridge/trainer.hpp"
#include "oracles.hpp"

namespace otbridge {
namespace {

EmbeddingBatch random_batch(std::initializer_list<Eigen::Index> lengths, Eigen::Index dim,
                            std::uint64_t seed) {
  EmbeddingBatch b;
  for (auto len : lengths) b.items.push_back(oracle::gaussian(len, dim, seed++));
  return b;
}

TEST(Project, IdentityWeight) {
  LinearBridge b;
  b.weight = Matrix::Identity(4, 4);
  b.bias = Vector::Zero(4);
  const auto in = random_batch({3, 1}, 4, 1);
  const auto out = project(b, in);
  EXPECT_EQ(out.items[0], in.items[0]);
  EXPECT_EQ(out.items[1], in.items[1]);
}

TEST(Project, ZeroWeightGivesBias) {
  LinearBridge b;
  b.weight = Matrix::Zero(3, 5);
  b.bias = Vector::LinSpaced(3, -1.0, 2.0);
  const auto out = project(b, random_batch({4}, 5, 2));
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_EQ(Vector(out.items[0].row(i).transpose()), b.bias);
}

TEST(Project, MatchesMatrixMultiply) {
  LinearBridge b;
  b.weight = oracle::gaussian(6, 9, 1);
  b.bias = oracle::gaussian(6, 1, 2).col(0);
  const Matrix x = oracle::gaussian(5, 9, 3);
  const Matrix out = project_rows(b, x);
  for (Eigen::Index r = 0; r < 5; ++r) {
    for (Eigen::Index i = 0; i < 6; ++i) {
      double acc = b.bias(i);
      for (Eigen::Index j = 0; j < 9; ++j) acc += b.weight(i, j) * x(r, j);
      EXPECT_NEAR(out(r, i), acc, 1e-12);
    }
  }
  EXPECT_THROW((void)project_rows(b, oracle::gaussian(2, 8, 1)), ValidationError);
}

TEST(Pool, SingleAndCancelling) {
  EmbeddingBatch b;
  const Matrix v = oracle::gaussian(1, 5, 4);
  b.items.push_back(v);
  Matrix pair(2, 5);
  pair << v, -v;
  b.items.push_back(pair);
  const auto pooled = pool(b);
  EXPECT_EQ(Matrix(pooled.rows.row(0)), v);
  EXPECT_EQ(pooled.rows.row(1).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Pool, MatchesSummation) {
  const auto b = random_batch({7}, 4, 5);
  const auto pooled = pool(b);
  for (Eigen::Index j = 0; j < 4; ++j) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < 7; ++i) acc += b.items[0](i, j);
    EXPECT_NEAR(pooled.rows(0, j), acc / 7.0, 1e-12);
  }
}

TEST(Pool, EmptySequenceRejected) {
  EmbeddingBatch b;
  b.items.push_back(Matrix(0, 3));
  b.items.push_back(oracle::gaussian(2, 3, 1));
  EXPECT_THROW((void)pool(b), ValidationError);
}

TEST(Pool, CommutesWithProjection) {
  const auto bridge = LinearBridge::initialize(5, 8, true, 3);
  LinearBridge biased = bridge;
  biased.bias = oracle::gaussian(5, 1, 9).col(0);
  const auto x = random_batch({3, 6, 1, 4}, 8, 10);
  const auto lhs = pool(project(biased, x));
  const Matrix rhs = project_rows(biased, pool(x).rows);
  EXPECT_LT((lhs.rows - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LinearBridge, InitializeAndParameters) {
  const auto b = LinearBridge::initialize(4, 9, true, 17);
  EXPECT_EQ(b.weight.rows(), 4);
  EXPECT_LE(b.weight.cwiseAbs().maxCoeff(), 1.0 / 3.0);
  EXPECT_EQ(b.bias, Vector(Vector::Zero(4)));
  EXPECT_EQ(b.init_seed, 17u);
  EXPECT_EQ(LinearBridge::initialize(4, 9, true, 17).weight, b.weight);
  EXPECT_NE(LinearBridge::initialize(4, 9, true, 18).weight, b.weight);
  EXPECT_FALSE(LinearBridge::initialize(4, 9, false, 17).has_bias());

  LinearBridge c = b;
  const Vector p = oracle::gaussian(b.parameter_count(), 1, 2).col(0);
  c.set_parameters(p);
  EXPECT_EQ(c.parameters(), p);
  EXPECT_EQ(c.weight(1, 0), p(1));
  EXPECT_EQ(c.bias(3), p(39));
  EXPECT_THROW(c.set_parameters(Vector::Zero(3)), ValidationError);
}

TEST(LinearBridge, GradientOfLinearFunctional) {
  auto bridge = LinearBridge::initialize(3, 4, true, 1);
  const auto x = random_batch({2, 3}, 4, 20);
  const std::vector<Matrix> c = {oracle::gaussian(2, 3, 30), oracle::gaussian(3, 3, 31)};
  auto f = [&](const Vector& p) {
    LinearBridge probe = bridge;
    probe.set_parameters(p);
    const auto y = project(probe, x);
    return (y.items[0].array() * c[0].array()).sum() + (y.items[1].array() * c[1].array()).sum();
  };
  const Vector analytic = bridge_gradient(bridge, x, c);
  EXPECT_LT(oracle::relative_error(analytic,
                                   oracle::central_difference(f, bridge.parameters(), 1e-5)),
            1e-9);
}

TEST(LrSchedule, Endpoints) {
  EXPECT_EQ(lr_at(0, 1e-3, 100, 2000), 0.0);
  EXPECT_EQ(lr_at(100, 1e-3, 100, 2000), 1e-3);
  EXPECT_EQ(lr_at(2000, 1e-3, 100, 2000), 0.0);
  EXPECT_NEAR(lr_at(50, 1e-3, 100, 2000), 5e-4, 1e-18);
  EXPECT_NEAR(lr_at(1050, 1e-3, 100, 2000), 5e-4, 1e-12 * 1e-3);
  EXPECT_EQ(lr_at(0, 2e-3, 0, 10), 2e-3);
  EXPECT_EQ(lr_at(10, 2e-3, 10, 10), 0.0);
}

TEST(LrSchedule, ContinuousAndBounded) {
  double previous = lr_at(0, 1.0, 30, 300);
  for (std::int64_t s = 1; s <= 300; ++s) {
    const double lr = lr_at(s, 1.0, 30, 300);
    EXPECT_GE(lr, 0.0);
    EXPECT_LE(lr, 1.0);
    EXPECT_LT(std::abs(lr - previous), 0.04);
    previous = lr;
  }
}

TEST(LrSchedule, OutOfRange) {
  EXPECT_THROW((void)lr_at(-1, 1.0, 10, 100), ValidationError);
  EXPECT_THROW((void)lr_at(101, 1.0, 10, 100), ValidationError);
  EXPECT_THROW((void)lr_at(5, 1.0, 200, 100), ValidationError);
}

TEST(AdamW, ZeroGradientIsNoOp) {
  Vector p = oracle::gaussian(5, 1, 1).col(0);
  const Vector before = p;
  auto state = AdamWState::zeros(5);
  adamw_step(p, Vector::Zero(5), state, 1, 0.1, AdamWConfig{});
  EXPECT_EQ(p, before);
  EXPECT_EQ(state.first_moment, Vector(Vector::Zero(5)));
  EXPECT_EQ(state.second_moment, Vector(Vector::Zero(5)));
}

TEST(AdamW, FirstStepMovesByLearningRate) {
  Vector p = Vector::Zero(1);
  auto state = AdamWState::zeros(1);
  adamw_step(p, Vector::Ones(1), state, 1, 0.1, AdamWConfig{});
  EXPECT_NEAR(p(0), -0.1, 1e-8);
  EXPECT_NEAR(p(0), -0.1 / (1.0 + 1e-8), 1e-16);
}

TEST(AdamW, QuadraticTrajectoryMatchesReference) {
  for (double wd : {0.0, 0.01}) {
    AdamWConfig cfg;
    cfg.weight_decay = wd;
    const auto ref = oracle::adamw_quadratic(2.5, 0.05, cfg.beta1, cfg.beta2, cfg.eps, wd, 50);
    Vector w = Vector::Constant(1, 2.5);
    auto state = AdamWState::zeros(1);
    for (int t = 1; t <= 50; ++t) {
      adamw_step(w, w, state, t, 0.05, cfg);
      ASSERT_NEAR(w(0), ref[static_cast<std::size_t>(t - 1)], 1e-10) << "step " << t;
    }
  }
}

TEST(AdamW, NonFiniteGradientNamesStep) {
  Vector p = Vector::Zero(2);
  auto state = AdamWState::zeros(2);
  Vector g(2);
  g << 1.0, std::numeric_limits<double>::infinity();
  try {
    adamw_step(p, g, state, 7, 0.1, AdamWConfig{});
    FAIL() << "expected RuntimeError";
  } catch (const RuntimeError& e) {
    EXPECT_NE(std::string(e.what()).find("step 7"), std::string::npos);
  }
  EXPECT_THROW(adamw_step(p, Vector::Zero(3), state, 1, 0.1, AdamWConfig{}), ValidationError);
}

SyntheticData small_data(std::uint64_t seed = 5) {
  SyntheticSpec spec;
  spec.vocab_size = 40;
  spec.anchor_dim = 6;
  spec.visual_dim = 8;
  spec.train_items = 48;
  spec.heldout_items = 10;
  spec.seed = seed;
  return generate_synthetic(spec);
}

TrainConfig short_config() {
  TrainConfig cfg;
  cfg.total_steps = 12;
  cfg.warmup_steps = 3;
  cfg.batch_size = 10;
  cfg.gap_every = 5;
  cfg.seed = 3;
  return cfg;
}

TEST(Train, RejectsAllZeroWeights) {
  const auto data = small_data();
  const auto decoder = ToyFrozenDecoder::from_space(data.space, {});
  auto cfg = short_config();
  cfg.loss.lambda_map = 0.0;
  cfg.loss.lambda_cap = 0.0;
  EXPECT_THROW((void)train(data.train, data.space, decoder, cfg), ValidationError);
}

TEST(Train, OneStepChangesBridge) {
  const auto data = small_data();
  const auto decoder = ToyFrozenDecoder::from_space(data.space, {});
  auto cfg = short_config();
  cfg.total_steps = 1;
  cfg.warmup_steps = 0;
  const auto result = train(data.train, data.space, decoder, cfg);
  const auto init = LinearBridge::initialize(6, 8, true, cfg.seed);
  EXPECT_GT((result.bridge.parameters() - init.parameters()).cwiseAbs().maxCoeff(), 0.0);
  ASSERT_EQ(result.log.size(), 1u);
  EXPECT_EQ(result.log[0].step, 1);
}

TEST(Train, LogShapeAndDeterminism) {
  const auto data = small_data();
  const auto decoder = ToyFrozenDecoder::from_space(data.space, {});
  const auto cfg = short_config();
  std::vector<StepMetrics> streamed;
  const auto a = train(data.train, data.space, decoder, cfg,
                       [&](const StepMetrics& m) { streamed.push_back(m); });
  const auto b = train(data.train, data.space, decoder, cfg);
  ASSERT_EQ(a.log.size(), 12u);
  EXPECT_EQ(streamed.size(), 12u);
  EXPECT_EQ(a.bridge.parameters(), b.bridge.parameters());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].loss, b.log[i].loss);
    EXPECT_EQ(a.log[i].lr, lr_at(static_cast<std::int64_t>(i), cfg.lr, 3, 12));
    EXPECT_EQ(a.log[i].gap_norm.has_value(), a.log[i].step % 5 == 0 || a.log[i].step == 12);
    EXPECT_TRUE(a.log[i].components.count("map") && a.log[i].components.count("cap"));
    EXPECT_LE(a.log[i].marginal_error, cfg.solver.tol);
  }
}

TEST(Train, AblationVariantsRun) {
  const auto data = small_data();
  const auto decoder = ToyFrozenDecoder::from_space(data.space, {});
  auto cfg = short_config();
  cfg.central = CentralSpace::prototypes;
  cfg.num_prototypes = 25;
  cfg.loss.lambda_itc = 0.1;
  cfg.loss.lambda_itm = 0.1;
  const auto result = train(data.train, data.space, decoder, cfg);
  ASSERT_TRUE(result.prototypes.has_value());
  ASSERT_TRUE(result.itm_head.has_value());
  EXPECT_EQ(result.prototypes->prototypes.rows(), 25);
  for (Eigen::Index i = 0; i < 25; ++i) {
    EXPECT_NEAR(result.prototypes->prototypes.row(i).norm(), 1.0, 1e-12);
  }
  EXPECT_TRUE(result.log.back().components.count("itm"));

  cfg.central = CentralSpace::equipartition;
  const auto eq = train(data.train, data.space, decoder, cfg);
  EXPECT_FALSE(eq.prototypes.has_value());
}

TEST(Train, NonFiniteLossAbortsWithDiagnostic) {
  auto data = small_data();
  data.train.visual.items[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
  const auto decoder = ToyFrozenDecoder::from_space(data.space, {});
  auto cfg = short_config();
  cfg.loss.lambda_map = 0.0;
  cfg.loss.lambda_cap = 1.0;
  cfg.batch_size = 48;
  std::vector<StepMetrics> streamed;
  EXPECT_THROW((void)train(data.train, data.space, decoder, cfg,
                           [&](const StepMetrics& m) { streamed.push_back(m); }),
               RuntimeError);
  ASSERT_EQ(streamed.size(), 1u);
  EXPECT_TRUE(std::isnan(streamed[0].loss));
}

TEST(Train, CentralSpaceNames) {
  for (auto c : {CentralSpace::words, CentralSpace::equipartition, CentralSpace::prototypes}) {
    EXPECT_EQ(central_space_from_string(to_string(c)), c);
  }
  EXPECT_THROW((void)central_space_from_string("clusters"), ValidationError);
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.warmup_steps = cfg.total_steps + 1;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.solver.eps = -1.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

}  // namespace
}  // namespace otbridge
