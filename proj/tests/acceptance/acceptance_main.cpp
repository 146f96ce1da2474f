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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "otbridge/checkpoint.hpp"
#include "otbridge/config.hpp"
#include "otbridge/evaluation.hpp"
#include "otbridge/io/embedding_file.hpp"
#include "otbridge/io/text_files.hpp"
#include "otbridge/metrics.hpp"
#include "otbridge/synthetic.hpp"
#include "temp_dir.hpp"

namespace otbridge {
namespace {

// Tolerances and thresholds.
constexpr double kMarginalTol = 1e-6;
constexpr double kSolverTol = 1e-8;
constexpr double kStructureTol = 1e-6;
constexpr double kOracleTol = 1e-8;
constexpr double kGradTol = 1e-4;
constexpr double kEntropyTol = 1e-9;
constexpr double kSinkhornBudgetSeconds = 10.0;
constexpr double kTrainBudgetSeconds = 120.0;
constexpr double kRecallThreshold = 0.9;
constexpr int kSeedVotesNeeded = 4;
constexpr double kArithmeticHitRate = 0.95;

const std::vector<double> kEpsGrid = {0.1, 0.05, 0.01, 0.005};
const std::vector<std::uint64_t> kRunSeeds = {42, 43, 44, 45, 46};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vector uniform(Eigen::Index n) { return Vector::Constant(n, 1.0 / static_cast<double>(n)); }

double marginal_violation(const Matrix& q, const Vector& row, const Vector& col) {
  const double r = (q.rowwise().sum() - row).cwiseAbs().maxCoeff();
  const double c = (q.colwise().sum().transpose() - col).cwiseAbs().maxCoeff();
  return std::max(r, c);
}

// Largest deviation of log Q - S/eps from a row-plus-column decomposition.
double structure_residual(const Matrix& q, const Matrix& s, double eps) {
  const Matrix r = q.array().log().matrix() - s / eps;
  const Vector row_mean = r.rowwise().mean();
  const Vector col_mean = r.colwise().mean().transpose();
  const double all_mean = r.mean();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      worst = std::max(worst, std::abs(r(i, j) - row_mean(i) - col_mean(j) + all_mean));
    }
  }
  return worst;
}

struct FeasibilityRun {
  std::vector<Matrix> plans;
  std::vector<Matrix> scores;
  std::vector<double> eps;
  std::vector<bool> converged;
  double worst_marginal = 0.0;
  double seconds = 0.0;
};

FeasibilityRun& feasibility_run() {
  static FeasibilityRun run = [] {
    FeasibilityRun out;
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<Eigen::Index> pick_k(2, 200);
    std::uniform_int_distribution<Eigen::Index> pick_b(1, 64);
    std::vector<std::tuple<Matrix, Vector, double>> problems;
    for (std::uint64_t i = 0; i < 100; ++i) {
      const Eigen::Index k = pick_k(rng);
      const Eigen::Index b = pick_b(rng);
      const Matrix s =
          oracle::unit_rows(k, 16, 1000 + 3 * i) * oracle::unit_rows(b, 16, 1001 + 3 * i).transpose();
      problems.emplace_back(s, oracle::random_simplex(k, 1002 + 3 * i), kEpsGrid[i % 4]);
    }
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& [s, mu, eps] : problems) {
      SolverConfig cfg;
      cfg.eps = eps;
      cfg.tol = kSolverTol;
      cfg.max_iter = 5000;
      const auto q = sinkhorn(ScoreMatrix{s}, mu, uniform(s.cols()), cfg);
      out.plans.push_back(q.plan);
      out.converged.push_back(q.converged);
    }
    out.seconds = seconds_since(t0);
    for (std::size_t i = 0; i < problems.size(); ++i) {
      const auto& [s, mu, eps] = problems[i];
      out.scores.push_back(s);
      out.eps.push_back(eps);
      out.worst_marginal = std::max(
          out.worst_marginal, marginal_violation(out.plans[i], mu, uniform(s.cols())));
    }
    return out;
  }();
  return run;
}

Outcome criterion_feasibility() {
  const auto& run = feasibility_run();
  const auto converged = std::count(run.converged.begin(), run.converged.end(), true);
  const bool pass = converged == 100 && run.worst_marginal <= kMarginalTol &&
                    run.seconds < kSinkhornBudgetSeconds;
  return {pass, fmt("100 instances, %ld converged, worst marginal error %.2e, %.2f s",
                    static_cast<long>(converged), run.worst_marginal, run.seconds)};
}

Outcome criterion_structure() {
  const auto& run = feasibility_run();
  double worst = 0.0;
  int checked = 0;
  for (std::size_t i = 0; i < run.plans.size(); ++i) {
    if (!run.converged[i]) continue;
    worst = std::max(worst, structure_residual(run.plans[i], run.scores[i], run.eps[i]));
    ++checked;
  }
  return {checked > 0 && worst <= kStructureTol,
          fmt("%d converged instances, worst residual %.2e", checked, worst)};
}

Outcome criterion_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<Eigen::Index> pick_k(1, 10);
  std::uniform_int_distribution<Eigen::Index> pick_b(1, 5);
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const Eigen::Index k = pick_k(rng);
    const Eigen::Index b = pick_b(rng);
    const double eps = kEpsGrid[i % 3];
    const Matrix s =
        oracle::unit_rows(k, 4, 500 + 3 * i) * oracle::unit_rows(b, 4, 501 + 3 * i).transpose();
    const Vector mu = oracle::random_simplex(k, 502 + 3 * i);
    SolverConfig cfg;
    cfg.eps = eps;
    cfg.tol = 1e-12;
    cfg.max_iter = 100000;
    const auto q = sinkhorn(ScoreMatrix{s}, mu, uniform(b), cfg);
    const Matrix ref = oracle::reference_sinkhorn(s, mu, uniform(b), eps, 10000);
    worst = std::max(worst, (q.plan - ref).cwiseAbs().maxCoeff());
  }
  return {worst <= kOracleTol, fmt("20 instances, worst entrywise difference %.2e", worst)};
}

Outcome criterion_gradients() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    worst = std::max(worst, oracle::gradient_suite(seed, 1e-5).worst());
  }
  return {worst < kGradTol, fmt("20 seeds, worst relative error %.2e", worst)};
}

Outcome criterion_entropy() {
  int violations = 0;
  double worst_drop = 0.0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const Eigen::Index k = 5 + static_cast<Eigen::Index>(4 * i);
    const Eigen::Index b = 3 + static_cast<Eigen::Index>(i);
    const Matrix s =
        oracle::unit_rows(k, 6, 700 + 3 * i) * oracle::unit_rows(b, 6, 701 + 3 * i).transpose();
    const Vector mu = oracle::random_simplex(k, 702 + 3 * i);
    std::vector<double> grid = kEpsGrid;
    std::sort(grid.begin(), grid.end());
    double previous = -1.0;
    for (double eps : grid) {
      SolverConfig cfg;
      cfg.eps = eps;
      cfg.tol = 1e-12;
      cfg.max_iter = 100000;
      const double h = assignment_entropy(sinkhorn(ScoreMatrix{s}, mu, uniform(b), cfg));
      if (h + kEntropyTol < previous) ++violations;
      worst_drop = std::max(worst_drop, previous - h);
      previous = h;
    }
  }
  return {violations == 0,
          fmt("10 instances, %d decreases beyond tolerance, largest step-down %.2e", violations,
              std::max(worst_drop, 0.0))};
}

// One synthetic training run and the held-out numbers the criteria need.
struct RunReport {
  double recall_at_1 = 0.0;
  double gap = 0.0;          // L2-normalized pooled rows
  double untrained_gap = 0.0;
  double seconds = 0.0;
  std::string metrics_jsonl;
  TrainResult result;
};

SyntheticSpec synthetic_spec(std::uint64_t seed) {
  SyntheticSpec spec;  // K=200, d=16, d_v=24, 512/100 items, sigma 0.05, zipf 1.0
  spec.seed = seed;
  return spec;
}

RunReport run_config(const SyntheticData& data, const TrainConfig& cfg,
                     const ToyFrozenDecoder::Options& decoder_options);

RunReport run_synthetic(const SyntheticData& data, std::uint64_t seed, double lambda_map,
                        double lambda_cap, CentralSpace central) {
  ToyFrozenDecoder::Options opts;
  opts.seed = seed;
  TrainConfig cfg;  // 2000 steps
  cfg.seed = seed;
  cfg.loss.lambda_map = lambda_map;
  cfg.loss.lambda_cap = lambda_cap;
  cfg.central = central;
  return run_config(data, cfg, opts);
}

RunReport run_config(const SyntheticData& data, const TrainConfig& cfg,
                     const ToyFrozenDecoder::Options& decoder_options) {
  const auto decoder = ToyFrozenDecoder::from_space(data.space, decoder_options);
  RunReport report;
  const auto t0 = std::chrono::steady_clock::now();
  report.result = train(data.train, data.space, decoder, cfg, [&](const StepMetrics& m) {
    report.metrics_jsonl += to_json_line(m);
    report.metrics_jsonl += '\n';
  });
  report.seconds = seconds_since(t0);

  const bool normalize = data.space.normalized();
  const PooledBatch text = pooled_text(data.heldout);
  const PooledBatch visual = pooled_visual(report.result.bridge, data.heldout);
  const std::vector<int> ks = {1};
  report.recall_at_1 = t2i_retrieve(text, visual, ks).recall_at.at(1);
  report.gap = modality_gap(visual, text, normalize).norm;
  const auto untrained = LinearBridge::initialize(data.space.dim(),
                                                  data.train.visual.dim(), cfg.use_bias, cfg.seed);
  report.untrained_gap = modality_gap(pooled_visual(untrained, data.heldout), text, normalize).norm;
  return report;
}

RunReport& reference_run() {
  static RunReport run = [] {
    const auto data = generate_synthetic(synthetic_spec(42));
    return run_synthetic(data, 42, 0.6, 0.4, CentralSpace::words);
  }();
  return run;
}

Outcome criterion_alignment() {
  const auto& run = reference_run();
  return {run.recall_at_1 >= kRecallThreshold && run.seconds < kTrainBudgetSeconds,
          fmt("held-out T2I R@1 %.3f after 2000 steps, %.1f s", run.recall_at_1, run.seconds)};
}

Outcome criterion_gap_ordering() {
  int votes = 0;
  std::string detail;
  for (const auto seed : kRunSeeds) {
    const auto data = generate_synthetic(synthetic_spec(seed));
    const double both = seed == 42 ? reference_run().gap
                                   : run_synthetic(data, seed, 0.6, 0.4, CentralSpace::words).gap;
    const auto cap_only = run_synthetic(data, seed, 0.0, 1.0, CentralSpace::words);
    const bool ordered = both < cap_only.gap && cap_only.gap < cap_only.untrained_gap;
    votes += ordered ? 1 : 0;
    detail += fmt("%s%llu: %.3f<%.3f<%.3f%s", detail.empty() ? "" : ", ",
                  static_cast<unsigned long long>(seed), both, cap_only.gap,
                  cap_only.untrained_gap, ordered ? "" : " (no)");
  }
  return {votes >= kSeedVotesNeeded, fmt("%d/5 seeds ordered [", votes) + detail + "]"};
}

Outcome criterion_polytope() {
  int votes = 0;
  std::string detail;
  for (const auto seed : kRunSeeds) {
    auto spec = synthetic_spec(seed);
    spec.zipf_s = 1.5;
    const auto data = generate_synthetic(spec);
    const double words = run_synthetic(data, seed, 0.6, 0.4, CentralSpace::words).recall_at_1;
    const double equi =
        run_synthetic(data, seed, 0.6, 0.4, CentralSpace::equipartition).recall_at_1;
    votes += words >= equi ? 1 : 0;
    detail += fmt("%s%llu: %.2f vs %.2f", detail.empty() ? "" : ", ",
                  static_cast<unsigned long long>(seed), words, equi);
  }
  return {votes >= kSeedVotesNeeded,
          fmt("%d/5 seeds with words >= equipartition [", votes) + detail + "]"};
}

Outcome criterion_arithmetic() {
  auto spec = synthetic_spec(42);
  spec.noise_sigma = 0.0;
  const auto data = generate_synthetic(spec);
  const auto bridge = run_synthetic(data, 42, 0.6, 0.4, CentralSpace::words).result.bridge;
  const auto suite = generate_arithmetic_suite(data, 200, 7);
  int hits = 0;
  for (const auto& p : suite.probes) {
    const auto embed = [&](const Matrix& x) -> Vector {
      return project_rows(bridge, x).row(0).transpose();
    };
    const std::vector<SignedTerm> terms = {
        {+1, embed(p.visual_a)}, {-1, embed(p.visual_b)}, {+1, embed(p.visual_c)}};
    const auto top = nearest_anchors(semantic_arithmetic(terms, true), suite.extended_space, 1);
    hits += top.front().index == p.target ? 1 : 0;
  }
  const double rate = static_cast<double>(hits) / static_cast<double>(suite.probes.size());
  return {rate >= kArithmeticHitRate,
          fmt("%d/%zu top-1 hits (%.1f%%)", hits, suite.probes.size(), 100.0 * rate)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome criterion_determinism() {
  std::vector<std::string> failures;
  const auto check = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };

  // Same config and seed, written to disk through the config text.
  const auto data = generate_synthetic(synthetic_spec(42));
  RunConfig cfg = parse_config_text("seed = 42\ndecoder_seed = 42\n", {});
  const RunConfig reparsed = parse_config_text(to_config_text(cfg), {});
  check(to_config_text(reparsed) == to_config_text(cfg), "config text");
  const auto again = run_config(data, reparsed.train, reparsed.decoder);
  const auto& first = reference_run();
  check(!first.metrics_jsonl.empty() && again.metrics_jsonl == first.metrics_jsonl,
        "metrics log");

  testing::TempDir dir;
  io::atomic_write(dir / "metrics.jsonl", first.metrics_jsonl);
  std::istringstream lines(slurp(dir / "metrics.jsonl"));
  std::string line;
  bool json_ok = true;
  while (std::getline(lines, line)) {
    json_ok = json_ok && nlohmann::ordered_json::parse(line).dump() == line;
  }
  check(json_ok, "metrics json");

  const Matrix emb = io::round_to_f32(data.space.weights());
  io::write_embedding_file(dir / "a.emb", emb);
  check(io::read_embedding_file(dir / "a.emb") == emb, "embedding file");
  io::write_embedding_file(dir / "b.emb", io::read_embedding_file(dir / "a.emb"));
  check(slurp(dir / "a.emb") == slurp(dir / "b.emb"), "embedding bytes");

  write_anchor_space(dir / "w.emb", dir / "vocab.txt", dir / "counts.tsv", emb,
                     data.space.vocab(), data.counts);
  const auto loaded = load_anchor_space(dir / "w.emb", dir / "vocab.txt", dir / "counts.tsv",
                                        data.space.normalized());
  check(loaded.vocab() == data.space.vocab(), "vocab");
  check(io::read_counts(dir / "counts.tsv") == data.counts.counts, "counts");
  check(loaded.mu() == data.space.mu(), "word marginal");

  io::write_captions(dir / "captions.txt", data.train.captions);
  check(io::read_captions(dir / "captions.txt") == data.train.captions, "captions");

  Checkpoint ckpt;
  ckpt.bridge = first.result.bridge;
  ckpt.bridge.weight = io::round_to_f32(ckpt.bridge.weight);
  ckpt.bridge.bias = io::round_to_f32(ckpt.bridge.bias);
  ckpt.step = 2000;
  write_checkpoint(dir / "ckpt", ckpt);
  const auto back = read_checkpoint(dir / "ckpt");
  check(back.bridge.weight == ckpt.bridge.weight && back.bridge.bias == ckpt.bridge.bias &&
            back.step == ckpt.step && back.bridge.init_seed == ckpt.bridge.init_seed,
        "checkpoint");

  std::string detail = "metrics log " + std::to_string(first.metrics_jsonl.size()) +
                       " bytes reproduced; config, embedding, vocab, counts, captions, "
                       "checkpoint and metrics files round-trip";
  if (!failures.empty()) {
    detail = "mismatch:";
    for (const auto& f : failures) detail += " " + f;
  }
  return {failures.empty(), detail};
}

}  // namespace
}  // namespace otbridge

int main() {
  using namespace otbridge;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"sinkhorn feasibility", criterion_feasibility},
      {"scaling structure", criterion_structure},
      {"reference equivalence", criterion_oracle},
      {"gradient suite", criterion_gradients},
      {"entropy monotonicity", criterion_entropy},
      {"synthetic alignment", criterion_alignment},
      {"modality gap ordering", criterion_gap_ordering},
      {"polytope ablation", criterion_polytope},
      {"semantic arithmetic", criterion_arithmetic},
      {"determinism and round-trip", criterion_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failed += outcome.pass ? 0 : 1;
    std::printf("[%s] criterion %zu %s: %s\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
