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
#include <string>
#include <vector>

#include "lisr/collection.h"
#include "lisr/encoder.h"
#include "lisr/fitter.h"

namespace lisr {

// Generators for reproducible synthetic workloads. All weights are exactly
// representable as f32, so generated collections round-trip through files.

struct SyntheticConfig {
  std::size_t n_docs = 10000;
  std::uint32_t vocab_size = 30000;
  double avg_nnz = 60.0;
  // Token ranks are drawn with probability proportional to rank^-exponent.
  double zipf_exponent = 1.0;
  std::uint64_t seed = 1;
};

//! Documents with Zipf-distributed token draws and weights that grow with
//! token rarity.
Collection synthetic_collection(const SyntheticConfig& cfg);

//! Queries built from the heaviest tokens of one random document plus a few
//! tokens of another, so every query token occurs in the collection.
std::vector<SparseVector> synthetic_queries(const Collection& docs,
                                            std::size_t n_queries,
                                            std::size_t nnz, std::uint64_t seed);

struct PlantedConfig {
  std::uint32_t vocab_size = 200;
  std::size_t dim = 16;
  std::size_t n_triples = 2000;
  std::size_t n_docs = 1000;
  std::size_t doc_nnz = 20;
  std::size_t min_query_len = 2;
  std::size_t max_query_len = 5;
  std::uint64_t seed = 7;
};

/*! A hidden (w*, b*) over random embeddings, a document corpus and teacher
 * triples scored by the induced table.
 *
 * Ids 0..3 are [PAD], [UNK], [CLS], [SEP]; every other token is "w<id>", so
 * the query text "w12 w40" tokenizes back to {12, 40}.
 */
struct PlantedModel {
  EmbeddingMatrix embeddings;
  std::vector<double> w;
  double b = 0.0;
  Collection docs;
  std::vector<std::string> vocab;
  std::vector<TrainTriple> triples;
  std::vector<DocId> pos_ids;
  std::vector<DocId> neg_ids;

  std::vector<TokenId> special_ids() const { return {0, 1, 2, 3}; }
  //! The planted table (specials forced to 0).
  ScoreTable table() const;
};

PlantedModel planted_model(const PlantedConfig& cfg);

//! Random query of non-special tokens, possibly with repeats.
TokenSequence planted_query(const PlantedConfig& cfg, std::uint64_t seed);

std::string query_text(const TokenSequence& tokens,
                       const std::vector<std::string>& vocab);

}  // namespace lisr
