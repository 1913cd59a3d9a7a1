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

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lisr/collection.h"
#include "lisr/index.h"
#include "lisr/sparse_vector.h"

namespace lisr {

struct SearchParams {
  std::size_t k = 10;
  // Number of heaviest query tokens whose lists are traversed; 0 = all.
  std::size_t query_cut = 0;
  // Threshold multiplier: a block is scored when dot(q, summary) reaches
  // heap_factor times the current k-th best score. With exact summaries 1.0
  // never skips a block that could enter the top k; smaller values score
  // more blocks, making up for summaries pruned below alpha = 1.
  double heap_factor = 1.0;

  void validate() const;
};

struct Hit {
  DocId doc = 0;
  double score = 0.0;

  friend bool operator==(const Hit&, const Hit&) = default;
};

//! Hits sorted by score descending, ties by doc id ascending.
struct TopKResult {
  std::vector<Hit> hits;
};

/*! Per-query scratch reused across searches.
 *
 * Holds the densified query and the visited-document stamps so that a batch
 * of queries allocates once. Not thread-safe; use one per thread.
 */
class Searcher {
 public:
  explicit Searcher(const Collection& c);

  TopKResult exhaustive(const SparseVector& q, std::size_t k);
  TopKResult approximate(const SparseVector& q, const InvertedIndex& ix,
                         const SearchParams& p);

 private:
  void load_query(const SparseVector& q);
  void unload_query(const SparseVector& q);

  const Collection* collection_;
  //! dot_dense restricted to tokens set in the query mask. Skipped terms
  //! are exact zeros, so the sum is bit-identical to dot_dense.
  double masked_dot(const SparseVector& v) const;

  std::vector<double> dense_query_;
  // One bit per token; small enough to stay in L1 while bounds are computed.
  std::vector<std::uint64_t> query_mask_;
  std::vector<std::uint32_t> visited_;
  std::uint32_t epoch_ = 0;
};

TopKResult search_exhaustive(const SparseVector& q, const Collection& c,
                             std::size_t k);

TopKResult search_approximate(const SparseVector& q, const InvertedIndex& ix,
                              const SearchParams& p);

//! Mean over queries of |approximate top-k ∩ exact top-k| / k.
double recall_vs_exact(std::span<const SparseVector> queries,
                       const Collection& c, const InvertedIndex& ix,
                       const SearchParams& p);

enum class SearchMode { kExhaustive, kApproximate };

struct BenchResult {
  double aqt_us = 0.0;
  std::vector<double> per_query_us;
  std::vector<TopKResult> results;
};

//! Times each query on the calling thread after one untimed warm-up pass.
//! Only the search call is inside the measured region. `ix` may be null for
//! exhaustive mode. Throws ValidationError on an empty query set.
BenchResult bench_aqt(std::span<const SparseVector> queries, SearchMode mode,
                      const Collection& c, const InvertedIndex* ix,
                      const SearchParams& p);

struct BenchRow {
  std::string mode;  // "exact" or "approx"
  std::uint32_t lambda = 0;
  double alpha = 0.0;
  double centroid_fraction = 0.0;
  std::size_t query_cut = 0;
  double heap_factor = 0.0;
  std::size_t k = 0;
  double aqt_us = 0.0;
  double recall_at_k = 0.0;
  // Optional effectiveness metric (e.g. "mrr_at_10") when qrels are given.
  std::string metric;
  double metric_value = 0.0;
};

//! CSV with header mode,lambda,alpha,centroid_fraction,query_cut,
//! heap_factor,k,aqt_us,recall_at_k plus one column named after the metric
//! when the rows carry one.
void write_bench_csv(std::span<const BenchRow> rows, std::ostream& out);

}  // namespace lisr
