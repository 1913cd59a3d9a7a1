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

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lisr/search.h"

namespace lisr {

//! qid -> (docid -> grade)
using Qrels = std::map<std::string, std::map<std::string, int>>;

struct RunEntry {
  std::string doc_id;
  double score = 0.0;
};

//! qid -> entries ordered by score descending, ties by doc id ascending.
using Run = std::map<std::string, std::vector<RunEntry>>;

//! Doc-id order for tie-breaking: numeric ids compare numerically, anything
//! else lexicographically, numeric before non-numeric.
bool doc_id_less(const std::string& a, const std::string& b);

//! Sorts every query's entries into canonical order; throws ValidationError
//! on a doc listed twice for one query.
void normalize_run(Run& run);

struct MetricReport {
  std::string metric;
  std::size_t k = 0;
  double value = 0.0;
  std::size_t n_queries = 0;  // queries averaged
  std::size_t n_skipped = 0;  // run queries without usable judgments
};

//! Per query: 1/rank of the first doc with grade >= 1 in the top k, else 0.
//! Queries without judgments are skipped and counted. Throws ValidationError
//! when no run query is judged.
MetricReport mrr_at_k(const Run& run, const Qrels& qrels, std::size_t k = 10);

//! Exponential-gain nDCG@k; queries with IDCG = 0 are skipped and counted.
MetricReport ndcg_at_k(const Run& run, const Qrels& qrels, std::size_t k = 10);

// "qid 0 docid grade", whitespace separated.
Qrels read_qrels(std::istream& in);
Qrels read_qrels(const std::filesystem::path& path);

// "qid Q0 docid rank score tag". Reading normalizes the order.
Run read_run(std::istream& in);
Run read_run(const std::filesystem::path& path);
void write_run(const Run& run, std::ostream& out, const std::string& tag = "lisr");
void write_run(const Run& run, const std::filesystem::path& path,
               const std::string& tag = "lisr");

//! Run from search results; doc ids are the collection positions.
Run run_from_results(std::span<const std::string> qids,
                     std::span<const TopKResult> results);

//! CSV: metric,k,value,n_queries,n_skipped
void write_metric_csv(std::span<const MetricReport> reports, std::ostream& out);

}  // namespace lisr
