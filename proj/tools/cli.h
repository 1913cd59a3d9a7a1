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
#include <string>
#include <vector>

#include "lisr/encoder.h"
#include "lisr/fitter.h"
#include "lisr/tokenizer.h"

namespace lisr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitDivergence = 3;

//! Parses and runs one command line. Never throws; failures become exit
//! codes with a message on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

struct QueryLine {
  std::string qid;
  std::string text;
};

//! "qid<TAB>text" per line; blank lines are skipped.
std::vector<QueryLine> read_queries_tsv(const std::filesystem::path& path);

struct TripleLine {
  std::string qid;
  std::string text;
  DocId pos = 0;
  DocId neg = 0;
  double teacher_pos = 0.0;
  double teacher_neg = 0.0;
};

//! "qid<TAB>text<TAB>pos_doc<TAB>neg_doc<TAB>teacher_pos<TAB>teacher_neg".
std::vector<TripleLine> read_triples_tsv(const std::filesystem::path& path);
void write_triples_tsv(const std::vector<TripleLine>& lines,
                       const std::filesystem::path& path);

//! Tokenizes each line, drops the vocabulary's special tokens and attaches
//! the referenced documents.
std::vector<TrainTriple> make_triples(const std::vector<TripleLine>& lines,
                                      const TokenizerVocab& vocab,
                                      const Collection& docs);

// Sidecar written next to encoded queries: one qid per line, in order.
std::filesystem::path qids_path(const std::filesystem::path& queries);
std::filesystem::path rejects_path(const std::filesystem::path& queries);
std::vector<std::string> read_qids(const std::filesystem::path& queries,
                                   std::size_t n);

//! Grid for the bench command, e.g. "lambda=2000,4000;heap_factor=0.9,1".
//! Keys: lambda, alpha, centroid_fraction, query_cut, heap_factor. Axes that
//! are absent stay empty.
struct Sweep {
  std::vector<std::uint32_t> lambda;
  std::vector<double> alpha;
  std::vector<double> centroid_fraction;
  std::vector<std::size_t> query_cut;
  std::vector<double> heap_factor;
};

Sweep parse_sweep(const std::string& text);

}  // namespace lisr::cli
