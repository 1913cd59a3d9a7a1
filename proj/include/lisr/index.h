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
#include <memory>
#include <span>
#include <vector>

#include "lisr/collection.h"
#include "lisr/sparse_vector.h"

namespace lisr {

struct BuildConfig {
  // Posting-list truncation length.
  std::uint32_t max_postings = 4000;
  // Fraction of a summary's L1 mass kept after energy pruning.
  double alpha = 0.4;
  // Centroids per list = ceil(centroid_fraction * list length).
  double centroid_fraction = 0.1;
  // Stored with the index. Clustering is seeded from the highest-impact
  // postings, so the current build does not draw random numbers.
  std::uint64_t seed = 0;

  //! Throws ValidationError when a field is out of range.
  void validate() const;
};

struct Block {
  std::vector<DocId> doc_ids;  // ascending
  SparseVector summary;
};

struct PostingList {
  TokenId token = 0;
  std::vector<Block> blocks;

  std::size_t posting_count() const;
};

/*! Truncated, clustered inverted index over a forward collection.
 *
 * The forward collection is shared, not copied: approximate search rescores
 * candidates against it.
 */
class InvertedIndex {
 public:
  InvertedIndex(std::shared_ptr<const Collection> forward, BuildConfig config,
                std::vector<PostingList> lists);

  //! Posting list for `token`, nullptr when the token has no postings.
  const PostingList* find(TokenId token) const;

  //! Non-empty lists in ascending token order.
  const std::vector<PostingList>& lists() const { return lists_; }
  const Collection& forward() const { return *forward_; }
  const std::shared_ptr<const Collection>& forward_ptr() const {
    return forward_;
  }
  const BuildConfig& config() const { return config_; }

 private:
  std::shared_ptr<const Collection> forward_;
  BuildConfig config_;
  std::vector<PostingList> lists_;
  std::vector<std::int32_t> slot_;  // token -> position in lists_, -1 if none
};

//! Partitions `docs` into at most `n_centroids` non-empty groups of indices
//! into `docs`. Centroids start at the first `n_centroids` docs (callers pass
//! docs in impact order), then three assign/update rounds run with
//! dot-product similarity. Empty clusters are refilled with the point least
//! similar to its own centroid.
std::vector<std::vector<std::size_t>> cluster_postings(
    std::span<const SparseVector* const> docs, std::size_t n_centroids,
    std::uint64_t seed);

std::vector<std::vector<std::size_t>> cluster_postings(
    std::span<const SparseVector> docs, std::size_t n_centroids,
    std::uint64_t seed);

//! Coordinate-wise max over `docs`, then the smallest set of heaviest
//! coordinates holding at least `alpha` of its L1 mass (ties: lower token).
SparseVector build_summary(std::span<const SparseVector* const> docs,
                           double alpha);

SparseVector build_summary(std::span<const SparseVector> docs, double alpha);

InvertedIndex build_index(std::shared_ptr<const Collection> c,
                          const BuildConfig& cfg);

struct IndexStats {
  std::size_t n_lists = 0;
  std::size_t n_postings = 0;
  std::size_t n_blocks = 0;
  std::size_t summary_nnz = 0;
  // Retained summary L1 mass over the mass of the unpruned block maxima.
  double summary_mass_retained = 0.0;
  // Size of the serialized index.
  std::size_t bytes = 0;
};

IndexStats index_stats(const InvertedIndex& ix);

// Binary format, little-endian:
//   "LSRI" u32 version=1, u32 lambda, f32 alpha, f32 centroid_fraction,
//   u64 seed, then per non-empty token in ascending order:
//   u32 token_id, u32 n_blocks, per block: u32 n_docs, u32 doc_ids[],
//   summary (u32 nnz, u32 ids[], f32 weights[]).
// The forward collection is not embedded; readers supply it.
void write_index(const InvertedIndex& ix, std::ostream& out);
void write_index(const InvertedIndex& ix, const std::filesystem::path& path);
InvertedIndex read_index(std::istream& in,
                         std::shared_ptr<const Collection> forward);
InvertedIndex read_index(const std::filesystem::path& path,
                         std::shared_ptr<const Collection> forward);

}  // namespace lisr
