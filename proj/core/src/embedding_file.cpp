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

#include "otbridge/io/embedding_file.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace otbridge {

Eigen::Index EmbeddingBatch::dim() const {
  if (items.empty()) throw ValidationError("empty batch");
  const Eigen::Index d = items.front().cols();
  for (const auto& item : items) {
    if (item.cols() != d) throw ValidationError("dimension mismatch within batch");
  }
  return d;
}

Matrix normalize_rows(const Matrix& rows) {
  Matrix out = rows;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double n = out.row(i).norm();
    if (!(n > 0.0)) throw ValidationError("cannot normalize a zero-norm row");
    out.row(i) /= n;
  }
  return out;
}

namespace io {
namespace {

static_assert(std::numeric_limits<float>::is_iec559, "f32 must be IEEE-754");

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

Matrix round_to_f32(const Matrix& m) { return m.cast<float>().cast<double>(); }

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw RuntimeError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw RuntimeError("rename to " + path.string() + " failed: " + ec.message());
}

void write_embedding_file(const std::filesystem::path& path, const Matrix& m) {
  if (m.rows() > std::numeric_limits<std::uint32_t>::max() ||
      m.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("matrix too large for embedding file");
  }
  std::string buf(kEmbeddingMagic, sizeof(kEmbeddingMagic));
  buf.reserve(16 + static_cast<std::size_t>(m.size()) * 4);
  put_u32(buf, static_cast<std::uint32_t>(m.rows()));
  put_u32(buf, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      put_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(m(r, c))));
    }
  }
  atomic_write(path, buf);
}

Matrix read_embedding_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open embedding file " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 16 || std::memcmp(buf.data(), kEmbeddingMagic, 8) != 0) {
    throw ValidationError("malformed embedding file (bad magic): " + path.string());
  }
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  const std::uint32_t rows = get_u32(p + 8);
  const std::uint32_t cols = get_u32(p + 12);
  const std::uint64_t expected = 16 + std::uint64_t{rows} * cols * 4;
  if (buf.size() != expected) {
    throw ValidationError("malformed embedding file (size mismatch): " + path.string());
  }
  Matrix m(rows, cols);
  const unsigned char* data = p + 16;
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) {
      m(r, c) = std::bit_cast<float>(get_u32(data));
      data += 4;
    }
  }
  return m;
}

}  // namespace io
}  // namespace otbridge
