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

#include "otbridge/checkpoint.hpp"

#include <map>

#include "otbridge/io/embedding_file.hpp"
#include "otbridge/io/text_files.hpp"

namespace otbridge {

void write_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt) {
  std::filesystem::create_directories(dir);
  const auto& b = ckpt.bridge;
  io::write_embedding_file(dir / "bridge.emb", b.weight);
  if (b.has_bias()) io::write_embedding_file(dir / "bridge_bias.emb", b.bias.transpose());
  io::write_key_values(dir / "bridge.meta", {
                                                {"has_bias", b.has_bias() ? "true" : "false"},
                                                {"out_dim", std::to_string(b.out_dim())},
                                                {"in_dim", std::to_string(b.in_dim())},
                                                {"step", std::to_string(ckpt.step)},
                                                {"seed", std::to_string(b.init_seed)},
                                            });
}

Checkpoint read_checkpoint(const std::filesystem::path& dir) {
  std::map<std::string, std::string> meta;
  for (auto& [k, v] : io::read_key_values(dir / "bridge.meta")) meta[k] = v;
  for (const char* key : {"has_bias", "out_dim", "in_dim", "step", "seed"}) {
    if (!meta.count(key)) throw ValidationError(std::string("checkpoint meta lacks ") + key);
  }
  Checkpoint ckpt;
  ckpt.bridge.weight = io::read_embedding_file(dir / "bridge.emb");
  try {
    ckpt.step = std::stoll(meta["step"]);
    ckpt.bridge.init_seed = std::stoull(meta["seed"]);
    if (ckpt.bridge.weight.rows() != std::stoll(meta["out_dim"]) ||
        ckpt.bridge.weight.cols() != std::stoll(meta["in_dim"])) {
      throw ValidationError("checkpoint weight shape does not match its meta file");
    }
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const ValidationError*>(&e)) throw;
    throw ValidationError("malformed checkpoint meta: " + std::string(e.what()));
  }
  if (meta["has_bias"] == "true") {
    const Matrix bias = io::read_embedding_file(dir / "bridge_bias.emb");
    if (bias.rows() != 1 || bias.cols() != ckpt.bridge.weight.rows()) {
      throw ValidationError("checkpoint bias has the wrong shape");
    }
    ckpt.bridge.bias = bias.row(0).transpose();
  } else if (meta["has_bias"] != "false") {
    throw ValidationError("checkpoint has_bias must be true or false");
  }
  return ckpt;
}

}  // namespace otbridge
