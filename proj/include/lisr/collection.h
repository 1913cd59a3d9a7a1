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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "lisr/sparse_vector.h"

namespace lisr {

/*! Ordered set of non-empty sparse vectors over a fixed vocabulary.
 *
 * Document ids are positions 0..size()-1. Encoded query batches use the same
 * type and file format.
 */
class Collection {
 public:
  explicit Collection(std::uint32_t vocab_size) : vocab_size_(vocab_size) {}

  //! Appends a vector and returns its id. Throws ValidationError for an
  //! empty vector or a token id outside the vocabulary.
  DocId add(SparseVector v);

  std::uint32_t vocab_size() const { return vocab_size_; }
  std::size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }
  const SparseVector& operator[](DocId id) const { return docs_[id]; }
  const std::vector<SparseVector>& docs() const { return docs_; }

  auto begin() const { return docs_.begin(); }
  auto end() const { return docs_.end(); }

 private:
  std::uint32_t vocab_size_;
  std::vector<SparseVector> docs_;
};

struct CollectionStats {
  std::size_t n_docs = 0;
  double avg_nnz = 0.0;
  std::size_t total_nnz = 0;
  // 16-bit token id + 16-bit weight per non-zero entry.
  std::size_t footprint_bytes = 0;
  // The 16-bit id accounting only holds below 2^16 tokens.
  bool vocab_exceeds_16bit = false;
};

inline constexpr std::size_t kFootprintBytesPerEntry = 4;

CollectionStats collection_stats(const Collection& c);

// Binary format, little-endian:
//   "LSRC" u32 version=1 u32 vocab_size u32 n_docs
//   per doc: u32 nnz, nnz x u32 token_id, nnz x f32 weight
void write_collection(const Collection& c, std::ostream& out);
void write_collection(const Collection& c, const std::filesystem::path& path);
Collection read_collection(std::istream& in);
Collection read_collection(const std::filesystem::path& path);

}  // namespace lisr
