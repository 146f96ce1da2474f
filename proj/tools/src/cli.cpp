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

#include "otbridge/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "otbridge/checkpoint.hpp"
#include "otbridge/config.hpp"
#include "otbridge/evaluation.hpp"
#include "otbridge/io/dataset_files.hpp"
#include "otbridge/io/embedding_file.hpp"
#include "otbridge/io/text_files.hpp"
#include "otbridge/metrics.hpp"
#include "otbridge/synthetic.hpp"

namespace otbridge::cli {
namespace {

namespace fs = std::filesystem;

std::string fixed(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

// Options shared by commands that build a RunConfig.
struct RunOptions {
  std::string config_path;
  std::string preset;
  std::string data_dir;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;

  void attach(CLI::App& app) {
    app.add_option("-c,--config", config_path, "Config file of 'key = value' lines");
    app.add_option("--preset", preset, "Preset: desk, paper-opt, paper-t5");
    app.add_option("-d,--data", data_dir, "Dataset directory");
    app.add_option("-o,--out", out_dir, "Output directory");
    app.add_option("--seed", seed, "Training seed");
    app.add_option("--set", sets, "Override a config key, KEY=VALUE (repeatable)");
  }

  [[nodiscard]] RunConfig resolve() const {
    KeyValues overrides;
    if (!preset.empty()) overrides.emplace_back("preset", preset);
    if (!data_dir.empty()) overrides.emplace_back("data_dir", data_dir);
    if (!out_dir.empty()) overrides.emplace_back("out_dir", out_dir);
    if (seed) overrides.emplace_back("seed", std::to_string(*seed));
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw ValidationError("--set expects KEY=VALUE, got '" + s + "'");
      }
      overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    return parse_config(config_path, overrides);
  }
};

struct Data {
  io::DatasetPaths paths;
  WordAnchorSpace space;
  Eigen::Index patches_per_item = 0;

  [[nodiscard]] PairedDataset split(const std::string& name) const {
    if (!fs::exists(paths.captions(name))) {
      throw ValidationError("dataset has no '" + name + "' split: " + paths.captions(name).string());
    }
    auto data = io::read_split(paths, name, patches_per_item);
    data.validate(space.dim(), space.size());
    return data;
  }
};

Data open_data(const fs::path& dir, bool normalize) {
  Data data;
  data.paths.dir = dir;
  data.space = load_anchor_space(data.paths.anchors(), data.paths.vocab(), data.paths.counts(),
                                 normalize);
  data.patches_per_item = io::read_patches_per_item(data.paths);
  return data;
}

// A finished training run loaded back from its output directory.
struct Run {
  fs::path dir;
  RunConfig cfg;
  Data data;
  Checkpoint ckpt;
};

Run open_run(const fs::path& dir, const std::string& data_override) {
  Run run;
  run.dir = dir;
  KeyValues overrides;
  if (!data_override.empty()) overrides.emplace_back("data_dir", data_override);
  run.cfg = parse_config(dir / "config.txt", overrides);
  require_path(run.cfg, "data_dir");
  run.data = open_data(run.cfg.data_dir, run.cfg.normalize);
  run.ckpt = read_checkpoint(dir / "checkpoint");
  if (run.ckpt.bridge.out_dim() != run.data.space.dim()) {
    throw ValidationError("dimension mismatch: checkpoint output does not match the anchor space");
  }
  return run;
}

struct HeldoutScores {
  std::map<int, double> recall_at;
  double gap = 0.0;
};

HeldoutScores score_split(const LinearBridge& bridge, const PairedDataset& split,
                          bool normalize) {
  const std::vector<int> ks = {1, 5, 10};
  const PooledBatch text = pooled_text(split);
  const PooledBatch visual = pooled_visual(bridge, split);
  HeldoutScores s;
  s.recall_at = t2i_retrieve(text, visual, ks).recall_at;
  s.gap = modality_gap(visual, text, normalize).norm;
  return s;
}

struct TrainOutcome {
  TrainResult result;
  double seconds = 0.0;
};

// Trains and writes config.txt, metrics.jsonl and the checkpoint into `out`.
TrainOutcome train_into(const fs::path& out, const RunConfig& cfg, const Data& data,
                        const PairedDataset& train_split) {
  fs::create_directories(out);
  io::atomic_write(out / "config.txt", to_config_text(cfg));
  const auto decoder = ToyFrozenDecoder::from_space(data.space, cfg.decoder);
  std::string jsonl;
  const auto t0 = std::chrono::steady_clock::now();
  TrainOutcome outcome;
  try {
    outcome.result = train(train_split, data.space, decoder, cfg.train, [&](const StepMetrics& m) {
      jsonl += to_json_line(m);
      jsonl += '\n';
    });
  } catch (const RuntimeError&) {
    io::atomic_write(out / "metrics.jsonl", jsonl);
    throw;
  }
  outcome.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  io::atomic_write(out / "metrics.jsonl", jsonl);
  write_checkpoint(out / "checkpoint",
                   Checkpoint{outcome.result.bridge, cfg.train.total_steps});
  if (outcome.result.prototypes) {
    io::write_embedding_file(out / "prototypes.emb", outcome.result.prototypes->prototypes);
  }
  return outcome;
}

int cmd_gen_synth(const SyntheticSpec& spec, const std::string& out_dir, std::ostream& out) {
  const auto data = generate_synthetic(spec);
  const io::DatasetPaths paths{out_dir};
  fs::create_directories(paths.dir);
  write_anchor_space(paths.anchors(), paths.vocab(), paths.counts(), data.space.weights(),
                     data.space.vocab(), data.counts);
  io::write_split(paths, "train", data.train);
  io::write_split(paths, "heldout", data.heldout);
  io::write_embedding_file(paths.dir / "planted_map.emb", data.planted_map);
  io::write_key_values(paths.meta(),
                       {
                           {"patches_per_item", std::to_string(spec.concepts_per_item)},
                           {"generator", "synthetic"},
                           {"seed", std::to_string(spec.seed)},
                           {"vocab_size", std::to_string(spec.vocab_size)},
                           {"anchor_dim", std::to_string(spec.anchor_dim)},
                           {"visual_dim", std::to_string(spec.visual_dim)},
                           {"train_items", std::to_string(spec.train_items)},
                           {"heldout_items", std::to_string(spec.heldout_items)},
                           {"noise_sigma", fixed(spec.noise_sigma, 6)},
                           {"zipf_s", fixed(spec.zipf_s, 6)},
                           {"visual_offset", fixed(spec.visual_offset, 6)},
                       });
  out << "wrote synthetic dataset to " << paths.dir.string() << " (K=" << spec.vocab_size
      << ", d=" << spec.anchor_dim << ", d_v=" << spec.visual_dim << ", " << spec.train_items
      << " train / " << spec.heldout_items << " held-out items)\n";
  return kExitOk;
}

int cmd_train(const RunOptions& opts, std::ostream& out) {
  const RunConfig cfg = opts.resolve();
  require_path(cfg, "data_dir");
  require_path(cfg, "out_dir");
  const Data data = open_data(cfg.data_dir, cfg.normalize);
  const auto outcome = train_into(cfg.out_dir, cfg, data, data.split("train"));
  const auto& last = outcome.result.log.back();
  out << "trained " << cfg.train.total_steps << " steps in " << fixed(outcome.seconds, 1)
      << " s, final loss " << fixed(last.loss) << "\n";
  if (fs::exists(data.paths.captions("heldout"))) {
    const auto s = score_split(outcome.result.bridge, data.split("heldout"), cfg.normalize);
    out << "heldout T2I R@1 " << fixed(s.recall_at.at(1), 3) << "  R@5 "
        << fixed(s.recall_at.at(5), 3) << "  R@10 " << fixed(s.recall_at.at(10), 3)
        << "  gap " << fixed(s.gap) << "\n";
  }
  out << "outputs in " << cfg.out_dir << "\n";
  return kExitOk;
}

int cmd_assign(const std::string& run_dir, const std::string& data_dir, const std::string& split,
               const std::string& modality, int top, int show, std::ostream& out) {
  const Run run = open_run(run_dir, data_dir);
  const auto items = run.data.split(split);
  const PooledBatch pooled =
      modality == "text" ? pooled_text(items) : pooled_visual(run.ckpt.bridge, items);
  const auto& solver = run.cfg.train.solver;

  AssignmentMatrix q;
  std::vector<std::string> labels = run.data.space.vocab();
  switch (run.cfg.train.central) {
    case CentralSpace::words:
      q = assign_batch(run.data.space, pooled, solver);
      break;
    case CentralSpace::equipartition:
      q = equipartition_assign(run.data.space.weights(), pooled, solver, run.cfg.normalize);
      break;
    case CentralSpace::prototypes: {
      const Matrix protos = io::read_embedding_file(run.dir / "prototypes.emb");
      q = equipartition_assign(protos, pooled, solver, run.cfg.normalize);
      labels.clear();
      for (Eigen::Index i = 0; i < protos.rows(); ++i) labels.push_back("p" + std::to_string(i));
      break;
    }
  }

  const fs::path q_path = run.dir / ("assign_" + split + "_" + modality + ".emb");
  io::write_embedding_file(q_path, q.plan);
  const auto words = top_words_per_item(q, labels, top);
  std::string csv = "item_id,rank,index,token,mass\n";
  for (std::size_t n = 0; n < words.size(); ++n) {
    for (std::size_t r = 0; r < words[n].size(); ++r) {
      csv += std::to_string(n) + "," + std::to_string(r + 1) + "," +
             std::to_string(words[n][r].index) + "," + words[n][r].token + "," +
             fixed(words[n][r].mass, 10) + "\n";
    }
  }
  const fs::path csv_path = run.dir / ("assign_" + split + "_" + modality + "_top.csv");
  io::atomic_write(csv_path, csv);

  out << "Q is " << q.plan.rows() << " x " << q.plan.cols() << ", " << q.iterations_used
      << " iterations, marginal error " << q.marginal_error
      << (q.converged ? "" : " (not converged)") << "\n";
  const std::size_t shown = std::min<std::size_t>(words.size(), static_cast<std::size_t>(show));
  for (std::size_t n = 0; n < shown; ++n) {
    out << "item " << n << ":";
    for (const auto& w : words[n]) out << " " << w.token << "(" << fixed(w.mass * q.plan.cols(), 3) << ")";
    out << "\n";
  }
  out << "wrote " << q_path.string() << " and " << csv_path.string() << "\n";
  return kExitOk;
}

int cmd_retrieve(const std::string& run_dir, const std::string& data_dir,
                 const std::string& split, std::vector<int> ks, std::ostream& out) {
  const Run run = open_run(run_dir, data_dir);
  const auto items = run.data.split(split);
  const auto result =
      t2i_retrieve(pooled_text(items), pooled_visual(run.ckpt.bridge, items), ks);
  out << "T2I retrieval on " << split << " (" << items.size() << " queries)\n";
  for (const auto& [k, r] : result.recall_at) out << "  R@" << pad(std::to_string(k), 4) << fixed(r, 3) << "\n";
  const fs::path csv = run.dir / ("retrieve_" + split + ".csv");
  write_rankings_csv(csv, result, *std::max_element(ks.begin(), ks.end()));
  out << "wrote " << csv.string() << "\n";
  return kExitOk;
}

int cmd_gap(const std::string& run_dir, const std::string& data_dir, const std::string& split,
            std::ostream& out) {
  const Run run = open_run(run_dir, data_dir);
  const auto items = run.data.split(split);
  const PooledBatch visual = pooled_visual(run.ckpt.bridge, items);
  const PooledBatch text = pooled_text(items);
  const auto raw = modality_gap(visual, text, false);
  const auto unit = modality_gap(visual, text, true);
  out << "modality gap on " << split << ": |delta| " << fixed(raw.norm) << " (unit-normalized rows "
      << fixed(unit.norm) << ")\n";
  const fs::path csv = run.dir / ("gap_" + split + ".csv");
  write_gap_csv(csv, visual, text);
  out << "wrote " << csv.string() << "\n";
  return kExitOk;
}

// "item:N" (projected pooled visual of item N) or "word:TOKEN".
Vector term_vector(const std::string& spec, const Run& run, const PairedDataset& items) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "item") {
    std::size_t used = 0;
    long long n = -1;
    try {
      n = std::stoll(arg, &used);
    } catch (const std::logic_error&) {
    }
    if (used != arg.size() || n < 0 || n >= static_cast<long long>(items.size())) {
      throw ValidationError("bad item term '" + spec + "'");
    }
    const Matrix rows = project_rows(run.ckpt.bridge, items.visual.items[static_cast<std::size_t>(n)]);
    return rows.colwise().mean().transpose();
  }
  if (kind == "word") {
    const auto idx = run.data.space.index_of(arg);
    if (idx < 0) throw ValidationError("unknown word '" + arg + "'");
    return run.data.space.weights().row(idx).transpose();
  }
  throw ValidationError("term must be item:N or word:TOKEN, got '" + spec + "'");
}

int cmd_arith(const std::string& run_dir, const std::string& data_dir, const std::string& split,
              const std::vector<std::string>& plus, const std::vector<std::string>& minus, int k,
              const std::string& csv, std::ostream& out) {
  if (plus.empty() && minus.empty()) throw ValidationError("arith needs at least one term");
  const Run run = open_run(run_dir, data_dir);
  const auto items = run.data.split(split);
  std::vector<SignedTerm> terms;
  for (const auto& p : plus) terms.push_back({+1, term_vector(p, run, items)});
  for (const auto& m : minus) terms.push_back({-1, term_vector(m, run, items)});
  const auto matches = nearest_anchors(semantic_arithmetic(terms, true), run.data.space, k);
  for (std::size_t r = 0; r < matches.size(); ++r) {
    out << pad(std::to_string(r + 1), 4) << pad(matches[r].token, 16) << fixed(matches[r].similarity)
        << "\n";
  }
  if (!csv.empty()) write_neighbors_csv(csv, matches);
  return kExitOk;
}

std::string render_tokens(const std::vector<int>& ids, const std::vector<std::string>& vocab) {
  std::string s;
  for (const int id : ids) {
    if (!s.empty()) s += ' ';
    s += vocab[static_cast<std::size_t>(id)];
  }
  return s;
}

int cmd_caption(const std::string& run_dir, const std::string& data_dir, const std::string& split,
                std::vector<int> item_ids, int max_len, bool no_repeat, std::ostream& out) {
  const Run run = open_run(run_dir, data_dir);
  const auto items = run.data.split(split);
  const auto decoder = ToyFrozenDecoder::from_space(run.data.space, run.cfg.decoder);
  if (item_ids.empty()) item_ids = {0};
  for (const int n : item_ids) {
    if (n < 0 || static_cast<std::size_t>(n) >= items.size()) {
      throw ValidationError("item " + std::to_string(n) + " out of range");
    }
    const auto& visual = items.visual.items[static_cast<std::size_t>(n)];
    const auto ids = greedy_decode(decoder, project_rows(run.ckpt.bridge, visual),
                                   run.cfg.train.prefix_ids, max_len, no_repeat);
    const auto& vocab = run.data.space.vocab();
    out << "item " << n << ": " << render_tokens(ids, vocab) << "\n"
        << "  reference: " << render_tokens(items.captions[static_cast<std::size_t>(n)], vocab)
        << "\n";
  }
  return kExitOk;
}

struct Variant {
  std::string label;
  std::function<void(RunConfig&)> apply;
};

std::vector<Variant> lambda_grid() {
  std::vector<Variant> grid;
  for (const auto& [m, c] : std::vector<std::pair<double, double>>{
           {0.0, 1.0}, {0.2, 0.8}, {0.4, 0.6}, {0.5, 0.5}, {0.6, 0.4}, {0.8, 0.2}, {1.0, 0.0}}) {
    grid.push_back({fixed(m, 1) + ":" + fixed(c, 1), [m = m, c = c](RunConfig& cfg) {
                      cfg.train.loss.lambda_map = m;
                      cfg.train.loss.lambda_cap = c;
                    }});
  }
  return grid;
}

std::vector<Variant> solver_grid() {
  std::vector<Variant> grid;
  for (const auto central :
       {CentralSpace::words, CentralSpace::equipartition, CentralSpace::prototypes}) {
    for (const double eps : {0.1, 0.05, 0.01, 0.005}) {
      grid.push_back({to_string(central) + " eps=" + fixed(eps, 3), [=](RunConfig& cfg) {
                        cfg.train.central = central;
                        cfg.train.solver.eps = eps;
                      }});
    }
  }
  return grid;
}

int cmd_ablate(const RunOptions& opts, const std::string& grid_name, std::ostream& out) {
  const RunConfig base = opts.resolve();
  require_path(base, "data_dir");
  require_path(base, "out_dir");
  const auto grid = grid_name == "lambda" ? lambda_grid() : solver_grid();
  const Data data = open_data(base.data_dir, base.normalize);
  const auto train_split = data.split("train");
  const auto heldout = data.split("heldout");
  fs::create_directories(base.out_dir);
  io::atomic_write(fs::path(base.out_dir) / "config.txt", to_config_text(base));

  std::string csv = "variant,r1,r5,r10,gap,final_loss,seconds\n";
  out << pad("variant", 22) << pad("R@1", 8) << pad("R@5", 8) << pad("R@10", 8) << pad("gap", 9)
      << "loss\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    RunConfig cfg = base;
    grid[i].apply(cfg);
    cfg.name = base.name + "-" + grid_name + "-" + std::to_string(i);
    cfg.train.validate();
    const fs::path dir = fs::path(base.out_dir) / ("variant_" + std::to_string(i));
    cfg.out_dir = dir.string();
    const auto outcome = train_into(dir, cfg, data, train_split);
    const auto s = score_split(outcome.result.bridge, heldout, cfg.normalize);
    const double loss = outcome.result.log.back().loss;
    out << pad(grid[i].label, 22) << pad(fixed(s.recall_at.at(1), 3), 8)
        << pad(fixed(s.recall_at.at(5), 3), 8) << pad(fixed(s.recall_at.at(10), 3), 8)
        << pad(fixed(s.gap), 9) << fixed(loss) << "\n";
    csv += grid[i].label + "," + fixed(s.recall_at.at(1), 4) + "," + fixed(s.recall_at.at(5), 4) +
           "," + fixed(s.recall_at.at(10), 4) + "," + fixed(s.gap, 6) + "," + fixed(loss, 6) +
           "," + fixed(outcome.seconds, 2) + "\n";
  }
  const fs::path csv_path = fs::path(base.out_dir) / ("ablation_" + grid_name + ".csv");
  io::atomic_write(csv_path, csv);
  out << "wrote " << csv_path.string() << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Word-anchor bridge training and evaluation", "otbridge"};
  app.require_subcommand(1);
  std::function<int()> action;

  auto* gen = app.add_subcommand("gen-synth", "Write a synthetic planted-map dataset");
  SyntheticSpec spec;
  std::string gen_out;
  gen->add_option("-o,--out", gen_out, "Output dataset directory")->required();
  gen->add_option("--seed", spec.seed, "Generator seed")->capture_default_str();
  gen->add_option("--vocab-size", spec.vocab_size, "K")->capture_default_str();
  gen->add_option("--anchor-dim", spec.anchor_dim, "d")->capture_default_str();
  gen->add_option("--visual-dim", spec.visual_dim, "d_v")->capture_default_str();
  gen->add_option("--train-items", spec.train_items)->capture_default_str();
  gen->add_option("--heldout-items", spec.heldout_items)->capture_default_str();
  gen->add_option("--concepts", spec.concepts_per_item, "Concepts (and patches) per item")
      ->capture_default_str();
  gen->add_option("--noise", spec.noise_sigma, "Visual noise sigma")->capture_default_str();
  gen->add_option("--zipf", spec.zipf_s, "Zipf exponent of concept frequencies")
      ->capture_default_str();
  gen->add_option("--visual-offset", spec.visual_offset)->capture_default_str();
  gen->callback([&] { action = [&] { return cmd_gen_synth(spec, gen_out, out); }; });

  RunOptions train_opts;
  auto* train_cmd = app.add_subcommand("train", "Train the bridge");
  train_opts.attach(*train_cmd);
  train_cmd->callback([&] { action = [&] { return cmd_train(train_opts, out); }; });

  // Commands that read a finished run.
  std::string run_dir;
  std::string run_data;
  std::string split = "heldout";
  const auto attach_run = [&](CLI::App* cmd) {
    cmd->add_option("-r,--run", run_dir, "Run directory written by train")->required();
    cmd->add_option("-d,--data", run_data, "Dataset directory (default: from the run config)");
    cmd->add_option("--split", split, "Dataset split")->capture_default_str();
  };

  auto* assign_cmd = app.add_subcommand("assign", "Dump the assignment matrix and top words");
  attach_run(assign_cmd);
  std::string modality = "visual";
  int top = 5;
  int show = 5;
  assign_cmd->add_option("--modality", modality)
      ->check(CLI::IsMember({"visual", "text"}))
      ->capture_default_str();
  assign_cmd->add_option("--top", top, "Words per item")->check(CLI::PositiveNumber)
      ->capture_default_str();
  assign_cmd->add_option("--show", show, "Items to print")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  assign_cmd->callback([&] {
    action = [&] { return cmd_assign(run_dir, run_data, split, modality, top, show, out); };
  });

  auto* retrieve_cmd = app.add_subcommand("retrieve", "Text-to-image recall table");
  attach_run(retrieve_cmd);
  std::vector<int> ks = {1, 5, 10};
  retrieve_cmd->add_option("-k,--ks", ks, "Cutoffs")->delimiter(',')->check(CLI::PositiveNumber);
  retrieve_cmd->callback(
      [&] { action = [&] { return cmd_retrieve(run_dir, run_data, split, ks, out); }; });

  auto* gap_cmd = app.add_subcommand("gap", "Modality gap and a 2-D PCA export");
  attach_run(gap_cmd);
  gap_cmd->callback([&] { action = [&] { return cmd_gap(run_dir, run_data, split, out); }; });

  auto* arith_cmd = app.add_subcommand("arith", "Semantic arithmetic over projected items");
  attach_run(arith_cmd);
  std::vector<std::string> plus;
  std::vector<std::string> minus;
  int arith_k = 5;
  std::string arith_csv;
  arith_cmd->add_option("--plus", plus, "Added term: item:N or word:TOKEN (repeatable)");
  arith_cmd->add_option("--minus", minus, "Subtracted term (repeatable)");
  arith_cmd->add_option("-k", arith_k, "Neighbours to print")->check(CLI::PositiveNumber)
      ->capture_default_str();
  arith_cmd->add_option("--csv", arith_csv, "Also write the neighbours as CSV");
  arith_cmd->callback([&] {
    action = [&] {
      return cmd_arith(run_dir, run_data, split, plus, minus, arith_k, arith_csv, out);
    };
  });

  auto* caption_cmd = app.add_subcommand("caption", "Greedy captions from the toy decoder");
  attach_run(caption_cmd);
  std::vector<int> caption_items;
  int max_len = 8;
  bool no_repeat = false;
  caption_cmd->add_option("--item", caption_items, "Item index (repeatable)");
  caption_cmd->add_option("--max-len", max_len)->check(CLI::PositiveNumber)->capture_default_str();
  caption_cmd->add_flag("--no-repeat", no_repeat, "Never emit a token twice");
  caption_cmd->callback([&] {
    action = [&] {
      return cmd_caption(run_dir, run_data, split, caption_items, max_len, no_repeat, out);
    };
  });

  RunOptions ablate_opts;
  std::string grid;
  auto* ablate_cmd = app.add_subcommand("ablate", "Train every variant of a grid and compare");
  ablate_opts.attach(*ablate_cmd);
  ablate_cmd->add_option("--grid", grid, "lambda or solver")
      ->required()
      ->check(CLI::IsMember({"lambda", "solver"}));
  ablate_cmd->callback([&] { action = [&] { return cmd_ablate(ablate_opts, grid, out); }; });

  if (!args.empty() && !args.front().empty() && args.front().front() != '-' &&
      app.get_subcommand_no_throw(args.front()) == nullptr) {
    err << "error: unknown subcommand '" << args.front() << "'\n\n" << app.help();
    return kExitValidation;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    return action();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace otbridge::cli
