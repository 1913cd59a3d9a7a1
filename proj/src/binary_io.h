// Copyright 2026-present the lisr authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "lisr/error.h"
#include "lisr/sparse_vector.h"

namespace lisr::detail {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, std::string_view what) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw FormatError(FormatError::Kind::kTruncated,
                      "truncated input while reading " + std::string(what));
  }
  return value;
}

inline void put_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

inline void expect_magic(std::istream& in, std::string_view magic) {
  std::array<char, 4> buf{};
  if (!in.read(buf.data(), 4) || std::string_view(buf.data(), 4) != magic) {
    throw FormatError(FormatError::Kind::kBadHeader,
                      "bad magic, expected " + std::string(magic));
  }
}

inline void expect_version(std::istream& in, std::uint32_t version) {
  std::uint32_t got = 0;
  if (!in.read(reinterpret_cast<char*>(&got), 4)) {
    throw FormatError(FormatError::Kind::kBadHeader, "missing format version");
  }
  if (got != version) {
    throw FormatError(FormatError::Kind::kBadHeader,
                      "unsupported format version " + std::to_string(got));
  }
}

inline std::ifstream open_in(const std::filesystem::path& path,
                             bool binary = true) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) {
    throw FormatError(FormatError::Kind::kIo,
                      "cannot open " + path.string() + " for reading");
  }
  return in;
}

inline std::ofstream open_out(const std::filesystem::path& path,
                              bool binary = true) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc
                                 : std::ios::out | std::ios::trunc);
  if (!out) {
    throw FormatError(FormatError::Kind::kIo,
                      "cannot open " + path.string() + " for writing");
  }
  return out;
}

inline void finish_out(std::ostream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) {
    throw FormatError(FormatError::Kind::kIo, "write failed: " + path.string());
  }
}

// Sparse vector body shared by the collection and index formats:
//   u32 nnz, nnz x u32 token_id, nnz x f32 weight
void put_sparse(std::ostream& out, const SparseVector& v);
SparseVector get_sparse(std::istream& in, std::uint32_t vocab_size,
                        std::string_view what);

}  // namespace lisr::detail
