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

#include "otbridge/config.hpp"

#include <charconv>
#include <cstdlib>
#include <functional>
#include <fstream>
#include <sstream>

#include "otbridge/io/text_files.hpp"

namespace otbridge {
namespace {

std::string format(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string format(std::int64_t v) { return std::to_string(v); }
std::string format(bool v) { return v ? "true" : "false"; }

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size()) {
    throw ValidationError("invalid value for " + key + ": '" + value + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ValidationError("invalid integer for " + key + ": '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ValidationError("invalid boolean for " + key + ": '" + value + "'");
}

struct Field {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define OTB_DOUBLE(name, member)                                                      \
  Field {                                                                             \
    name, [](const RunConfig& c) { return format(static_cast<double>(c.member)); },  \
        [](RunConfig& c, const std::string& v) { c.member = parse_double(name, v); }  \
  }
#define OTB_INT(name, member)                                                              \
  Field {                                                                                  \
    name, [](const RunConfig& c) { return format(static_cast<std::int64_t>(c.member)); }, \
        [](RunConfig& c, const std::string& v) {                                           \
          c.member = static_cast<decltype(c.member)>(parse_int(name, v));                  \
        }                                                                                  \
  }
#define OTB_BOOL(name, member)                                                    \
  Field {                                                                         \
    name, [](const RunConfig& c) { return format(c.member); },                   \
        [](RunConfig& c, const std::string& v) { c.member = parse_bool(name, v); } \
  }
#define OTB_STRING(name, member)                                           \
  Field {                                                                  \
    name, [](const RunConfig& c) { return c.member; },                    \
        [](RunConfig& c, const std::string& v) { c.member = v; }          \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      OTB_STRING("name", name),
      OTB_STRING("preset", preset),
      OTB_STRING("data_dir", data_dir),
      OTB_STRING("out_dir", out_dir),
      OTB_BOOL("normalize", normalize),
      OTB_DOUBLE("lr", train.lr),
      OTB_INT("warmup_steps", train.warmup_steps),
      OTB_INT("total_steps", train.total_steps),
      OTB_INT("batch_size", train.batch_size),
      OTB_DOUBLE("adamw_beta1", train.adamw.beta1),
      OTB_DOUBLE("adamw_beta2", train.adamw.beta2),
      OTB_DOUBLE("adamw_eps", train.adamw.eps),
      OTB_DOUBLE("weight_decay", train.adamw.weight_decay),
      OTB_DOUBLE("eps", train.solver.eps),
      OTB_DOUBLE("tol", train.solver.tol),
      OTB_INT("max_iter", train.solver.max_iter),
      OTB_BOOL("log_domain", train.solver.log_domain),
      OTB_DOUBLE("tau", train.loss.tau),
      OTB_DOUBLE("lambda_map", train.loss.lambda_map),
      OTB_DOUBLE("lambda_cap", train.loss.lambda_cap),
      OTB_DOUBLE("lambda_itc", train.loss.lambda_itc),
      OTB_DOUBLE("lambda_itm", train.loss.lambda_itm),
      OTB_DOUBLE("itc_temperature", train.loss.itc_temperature),
      OTB_INT("seed", train.seed),
      OTB_BOOL("bias", train.use_bias),
      Field{"central", [](const RunConfig& c) { return to_string(c.train.central); },
            [](RunConfig& c, const std::string& v) {
              c.train.central = central_space_from_string(v);
            }},
      OTB_INT("num_prototypes", train.num_prototypes),
      OTB_INT("gap_every", train.gap_every),
      OTB_DOUBLE("decoder_gain", decoder.gain),
      OTB_DOUBLE("decoder_mixing", decoder.mixing),
      OTB_INT("decoder_seed", decoder.seed),
  };
  return table;
}

#undef OTB_DOUBLE
#undef OTB_INT
#undef OTB_BOOL
#undef OTB_STRING

const Field& field(const std::string& key) {
  for (const auto& f : fields()) {
    if (key == f.key) return f;
  }
  throw ValidationError("unknown config key '" + key + "'");
}

}  // namespace

std::vector<std::string> preset_names() { return {"desk", "paper-opt", "paper-t5"}; }

RunConfig preset_config(const std::string& preset) {
  RunConfig cfg;
  cfg.preset = preset;
  auto& t = cfg.train;
  if (preset == "desk") {
    // TrainConfig defaults.
  } else if (preset == "paper-opt") {
    t.lr = 1e-4;
    t.warmup_steps = 1500;
    t.batch_size = 128;
    t.total_steps = 30000;
  } else if (preset == "paper-t5") {
    t.lr = 5e-3;
    t.warmup_steps = 3000;
    t.batch_size = 256;
    t.total_steps = 15000;
  } else {
    throw ValidationError("unknown preset '" + preset + "'");
  }
  return cfg;
}

RunConfig parse_config_text(const std::string& text, const KeyValues& overrides) {
  const auto entries = io::parse_key_values(text);
  std::string preset = "desk";
  for (const auto* list : {&entries, &overrides}) {
    for (const auto& [key, value] : *list) {
      field(key);  // rejects unknown keys before anything is applied
      if (key == "preset") preset = value;
    }
  }
  RunConfig cfg = preset_config(preset);
  for (const auto* list : {&entries, &overrides}) {
    for (const auto& [key, value] : *list) {
      if (key != "preset") field(key).set(cfg, value);
    }
  }
  cfg.train.validate();
  if (cfg.train.solver.max_iter < 1) throw ValidationError("max_iter must be at least 1");
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path, const KeyValues& overrides) {
  std::string text;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return parse_config_text(text, overrides);
}

KeyValues to_key_values(const RunConfig& cfg) {
  KeyValues out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(cfg));
  return out;
}

std::string to_config_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& [key, value] : to_key_values(cfg)) out += key + " = " + value + "\n";
  return out;
}

void require_path(const RunConfig& cfg, const std::string& key) {
  if (field(key).get(cfg).empty()) throw ValidationError("missing required path: " + key);
}

}  // namespace otbridge
