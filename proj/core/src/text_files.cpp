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

#include "otbridge/io/text_files.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "otbridge/io/embedding_file.hpp"
#include "otbridge/types.hpp"

namespace otbridge::io {
namespace {

std::ifstream open_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename Int>
Int parse_int(std::string_view text, const std::string& where) {
  Int value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ValidationError("malformed integer '" + std::string(text) + "' in " + where);
  }
  return value;
}

}  // namespace

std::vector<std::string> read_vocab(const std::filesystem::path& path) {
  auto in = open_text(path);
  std::vector<std::string> vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    vocab.push_back(line);
  }
  return vocab;
}

void write_vocab(const std::filesystem::path& path, const std::vector<std::string>& vocab) {
  std::string out;
  for (const auto& token : vocab) {
    if (token.find('\n') != std::string::npos) {
      throw ValidationError("vocab token contains a newline");
    }
    out += token;
    out += '\n';
  }
  atomic_write(path, out);
}

std::map<std::string, std::uint64_t> read_counts(const std::filesystem::path& path) {
  auto in = open_text(path);
  std::map<std::string, std::uint64_t> counts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) {
      throw ValidationError("malformed counts line " + std::to_string(lineno) + " in " +
                            path.string());
    }
    const std::string where = path.string() + ":" + std::to_string(lineno);
    counts[line.substr(0, tab)] +=
        parse_int<std::uint64_t>(std::string_view(line).substr(tab + 1), where);
  }
  return counts;
}

void write_counts(const std::filesystem::path& path,
                  const std::map<std::string, std::uint64_t>& counts) {
  std::string out;
  for (const auto& [token, n] : counts) {
    out += token;
    out += '\t';
    out += std::to_string(n);
    out += '\n';
  }
  atomic_write(path, out);
}

std::vector<std::vector<int>> read_captions(const std::filesystem::path& path) {
  auto in = open_text(path);
  std::vector<std::vector<int>> captions;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::vector<int> ids;
    std::istringstream words(line);
    std::string word;
    while (words >> word) {
      ids.push_back(parse_int<int>(word, path.string() + ":" + std::to_string(lineno)));
    }
    captions.push_back(std::move(ids));
  }
  return captions;
}

void write_captions(const std::filesystem::path& path,
                    const std::vector<std::vector<int>>& captions) {
  std::string out;
  for (const auto& ids : captions) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i > 0) out += ' ';
      out += std::to_string(ids[i]);
    }
    out += '\n';
  }
  atomic_write(path, out);
}

std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("expected 'key = value' on line " + std::to_string(lineno));
    }
    const auto key = trim(view.substr(0, eq));
    if (key.empty()) throw ValidationError("empty key on line " + std::to_string(lineno));
    entries.emplace_back(std::string(key), std::string(trim(view.substr(eq + 1))));
  }
  return entries;
}

std::vector<std::pair<std::string, std::string>> read_key_values(
    const std::filesystem::path& path) {
  auto in = open_text(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

void write_key_values(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, std::string>>& entries) {
  std::string out;
  for (const auto& [key, value] : entries) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  }
  atomic_write(path, out);
}

}  // namespace otbridge::io
