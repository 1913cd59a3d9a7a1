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
#include <span>
#include <vector>

#include "lisr/collection.h"
#include "lisr/error.h"
#include "lisr/sparse_vector.h"
#include "lisr/tokenizer.h"

namespace lisr {

//! Context-free word embeddings, one row of dimension `dim` per token.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data);

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }
  std::span<const float> row(TokenId i) const {
    return {data_.data() + static_cast<std::size_t>(i) * dim_, dim_};
  }
  std::span<const float> data() const { return data_; }

 private:
  std::size_t rows_;
  std::size_t dim_;
  std::vector<float> data_;
};

// "LSRE" u32 version=1 u32 rows u32 dim, rows*dim f32 row-major.
void write_embeddings(const EmbeddingMatrix& e, const std::filesystem::path& path);
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);
EmbeddingMatrix read_embeddings(std::istream& in);

//! Learned static per-token query weights; every score is finite and >= 0.
struct ScoreTable {
  std::vector<double> scores;

  std::size_t size() const { return scores.size(); }
  //! Throws ValidationError when a score is negative or non-finite.
  void validate() const;
};

struct IdfTable {
  std::vector<double> idf;
  std::size_t n_docs = 0;
};

//! Thrown by encode_query when no token carries a positive score.
class EmptyQueryError : public ValidationError {
 public:
  EmptyQueryError() : ValidationError("query maps to empty vector") {}
};

//! log(1 + max(0, w.e + b)).
double score_from_embedding(std::span<const double> w, double b,
                            std::span<const float> e);
double score_from_embedding(std::span<const double> w, double b,
                            std::span<const double> e);

//! Scores every row of `e`; tokens listed in `zeroed` (the special tokens)
//! are forced to 0.
ScoreTable build_table(std::span<const double> w, double b,
                       const EmbeddingMatrix& e,
                       std::span<const TokenId> zeroed = {});

//! Sum of table scores per distinct token, i.e. count x score. Zero-score
//! tokens are omitted. Throws EmptyQueryError when nothing survives.
SparseVector encode_query(const TokenSequence& tokens, const ScoreTable& table);

//! BM25-style idf: ln(1 + (N - df + 0.5) / (df + 0.5)), floored at 0, with
//! df counted over the non-zero supports of `c`.
IdfTable compute_idf(const Collection& c);

ScoreTable combine_idf(const ScoreTable& table, const IdfTable& idf);

// Text: "#LSRT v1 vocab=<V>" then "token_id<TAB>score" lines. Absent ids
// read as 0. `expected_vocab` (when non-zero) must equal the header.
void write_table(const ScoreTable& t, std::ostream& out);
void write_table(const ScoreTable& t, const std::filesystem::path& path);
ScoreTable read_table(std::istream& in, std::size_t expected_vocab = 0);
ScoreTable read_table(const std::filesystem::path& path,
                      std::size_t expected_vocab = 0);

// Text: "#LSRF v1 vocab=<V> docs=<N>" then "token_id<TAB>idf" lines.
void write_idf(const IdfTable& t, const std::filesystem::path& path);
IdfTable read_idf(const std::filesystem::path& path);

}  // namespace lisr
