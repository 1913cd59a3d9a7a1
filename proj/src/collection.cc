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

#include "lisr/collection.h"

#include <cmath>
#include <string>

#include "binary_io.h"
#include "lisr/error.h"

namespace lisr {

namespace {
constexpr std::string_view kMagic = "LSRC";
constexpr std::uint32_t kVersion = 1;
}  // namespace

DocId Collection::add(SparseVector v) {
  if (v.empty()) throw ValidationError("empty vectors are not allowed");
  if (v.ids().back() >= vocab_size_) {
    throw ValidationError("token id " + std::to_string(v.ids().back()) +
                          " outside vocabulary of size " +
                          std::to_string(vocab_size_));
  }
  docs_.push_back(std::move(v));
  return static_cast<DocId>(docs_.size() - 1);
}

CollectionStats collection_stats(const Collection& c) {
  CollectionStats s;
  s.n_docs = c.size();
  for (const auto& d : c) s.total_nnz += d.size();
  s.avg_nnz = s.n_docs == 0 ? 0.0
                            : static_cast<double>(s.total_nnz) /
                                  static_cast<double>(s.n_docs);
  s.footprint_bytes = kFootprintBytesPerEntry * s.total_nnz;
  s.vocab_exceeds_16bit = c.vocab_size() >= (1u << 16);
  return s;
}

namespace detail {

void put_sparse(std::ostream& out, const SparseVector& v) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(v.size()));
  for (TokenId id : v.ids()) put<std::uint32_t>(out, id);
  for (double w : v.weights()) put<float>(out, static_cast<float>(w));
}

SparseVector get_sparse(std::istream& in, std::uint32_t vocab_size,
                        std::string_view what) {
  const auto nnz = get<std::uint32_t>(in, what);
  if (nnz == 0) {
    throw FormatError(FormatError::Kind::kBadValue,
                      std::string(what) + ": empty vector");
  }
  if (nnz > vocab_size) {
    throw FormatError(FormatError::Kind::kIdOutOfRange,
                      std::string(what) + ": nnz exceeds vocabulary size");
  }
  std::vector<TokenId> ids(nnz);
  std::vector<double> weights(nnz);
  for (std::uint32_t i = 0; i < nnz; ++i) {
    ids[i] = get<std::uint32_t>(in, what);
  }
  for (std::uint32_t i = 0; i < nnz; ++i) {
    if (ids[i] >= vocab_size) {
      throw FormatError(FormatError::Kind::kIdOutOfRange,
                        std::string(what) + ": token id " +
                            std::to_string(ids[i]) + " >= vocab size " +
                            std::to_string(vocab_size));
    }
    if (i > 0 && ids[i] <= ids[i - 1]) {
      throw FormatError(FormatError::Kind::kOrdering,
                        std::string(what) + ": token ids not increasing (" +
                            std::to_string(ids[i - 1]) + ", " +
                            std::to_string(ids[i]) + ")");
    }
  }
  for (std::uint32_t i = 0; i < nnz; ++i) {
    const auto w = get<float>(in, what);
    if (!std::isfinite(w) || w <= 0.0f) {
      throw FormatError(FormatError::Kind::kBadValue,
                        std::string(what) + ": weight must be finite and > 0");
    }
    weights[i] = w;
  }
  return SparseVector::from_sorted(std::move(ids), std::move(weights));
}

}  // namespace detail

void write_collection(const Collection& c, std::ostream& out) {
  detail::put_magic(out, kMagic);
  detail::put<std::uint32_t>(out, kVersion);
  detail::put<std::uint32_t>(out, c.vocab_size());
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(c.size()));
  for (const auto& d : c) detail::put_sparse(out, d);
}

void write_collection(const Collection& c, const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  write_collection(c, out);
  detail::finish_out(out, path);
}

Collection read_collection(std::istream& in) {
  detail::expect_magic(in, kMagic);
  detail::expect_version(in, kVersion);
  const auto vocab = detail::get<std::uint32_t>(in, "vocab size");
  const auto n_docs = detail::get<std::uint32_t>(in, "document count");
  Collection c(vocab);
  for (std::uint32_t i = 0; i < n_docs; ++i) {
    c.add(detail::get_sparse(in, vocab, "doc " + std::to_string(i)));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(FormatError::Kind::kBadHeader,
                      "trailing bytes after " + std::to_string(n_docs) +
                          " documents");
  }
  return c;
}

Collection read_collection(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  return read_collection(in);
}

}  // namespace lisr
