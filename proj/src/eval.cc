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

#include "lisr/eval.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "binary_io.h"
#include "lisr/error.h"

namespace lisr {

namespace {

bool all_digits(const std::string& s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool entry_before(const RunEntry& a, const RunEntry& b) {
  if (a.score != b.score) return a.score > b.score;
  return doc_id_less(a.doc_id, b.doc_id);
}

FormatError line_error(std::size_t line, const std::string& what) {
  return FormatError(FormatError::Kind::kBadValue,
                     "line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> fields(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string f;
  while (ss >> f) out.push_back(f);
  return out;
}

// Grades of the top-k run entries for one query.
std::vector<int> ranked_grades(const std::vector<RunEntry>& entries,
                               const std::map<std::string, int>& judged,
                               std::size_t k) {
  std::vector<int> grades;
  for (std::size_t i = 0; i < entries.size() && i < k; ++i) {
    auto it = judged.find(entries[i].doc_id);
    grades.push_back(it == judged.end() ? 0 : it->second);
  }
  return grades;
}

}  // namespace

bool doc_id_less(const std::string& a, const std::string& b) {
  const bool na = all_digits(a);
  const bool nb = all_digits(b);
  if (na != nb) return na;
  if (!na) return a < b;
  const auto strip = [](const std::string& s) {
    const auto p = s.find_first_not_of('0');
    return p == std::string::npos ? std::string_view("0")
                                  : std::string_view(s).substr(p);
  };
  const auto sa = strip(a);
  const auto sb = strip(b);
  if (sa.size() != sb.size()) return sa.size() < sb.size();
  if (sa != sb) return sa < sb;
  return a < b;
}

void normalize_run(Run& run) {
  for (auto& [qid, entries] : run) {
    std::set<std::string_view> seen;
    for (const auto& e : entries) {
      if (!seen.insert(e.doc_id).second) {
        throw ValidationError("query " + qid + " lists doc " + e.doc_id +
                              " twice");
      }
    }
    std::sort(entries.begin(), entries.end(), entry_before);
  }
}

MetricReport mrr_at_k(const Run& run, const Qrels& qrels, std::size_t k) {
  MetricReport r{"mrr", k, 0.0, 0, 0};
  double sum = 0.0;
  for (const auto& [qid, entries] : run) {
    auto judged = qrels.find(qid);
    if (judged == qrels.end() || judged->second.empty()) {
      ++r.n_skipped;
      continue;
    }
    const auto grades = ranked_grades(entries, judged->second, k);
    double rr = 0.0;
    for (std::size_t i = 0; i < grades.size(); ++i) {
      if (grades[i] >= 1) {
        rr = 1.0 / static_cast<double>(i + 1);
        break;
      }
    }
    sum += rr;
    ++r.n_queries;
  }
  if (r.n_queries == 0) throw ValidationError("no run query has judgments");
  r.value = sum / static_cast<double>(r.n_queries);
  return r;
}

MetricReport ndcg_at_k(const Run& run, const Qrels& qrels, std::size_t k) {
  MetricReport r{"ndcg", k, 0.0, 0, 0};
  double sum = 0.0;
  bool any_judged = false;
  for (const auto& [qid, entries] : run) {
    auto judged = qrels.find(qid);
    if (judged == qrels.end() || judged->second.empty()) {
      ++r.n_skipped;
      continue;
    }
    any_judged = true;
    std::vector<int> ideal;
    for (const auto& [doc, grade] : judged->second) ideal.push_back(grade);
    std::sort(ideal.rbegin(), ideal.rend());
    double idcg = 0.0;
    for (std::size_t i = 0; i < ideal.size() && i < k; ++i) {
      idcg += (std::exp2(ideal[i]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
    }
    if (idcg <= 0.0) {
      ++r.n_skipped;
      continue;
    }
    const auto grades = ranked_grades(entries, judged->second, k);
    double dcg = 0.0;
    for (std::size_t i = 0; i < grades.size(); ++i) {
      dcg += (std::exp2(grades[i]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
    }
    sum += dcg / idcg;
    ++r.n_queries;
  }
  if (!any_judged) throw ValidationError("no run query has judgments");
  r.value = r.n_queries == 0 ? 0.0 : sum / static_cast<double>(r.n_queries);
  return r;
}

Qrels read_qrels(std::istream& in) {
  Qrels q;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto f = fields(line);
    if (f.empty()) continue;
    if (f.size() != 4) throw line_error(line_no, "expected 'qid 0 docid grade'");
    int grade = 0;
    auto [ptr, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), grade);
    if (ec != std::errc() || ptr != f[3].data() + f[3].size()) {
      throw line_error(line_no, "bad grade '" + f[3] + "'");
    }
    // Negative grades are treated as non-relevant.
    q[f[0]][f[2]] = std::max(grade, 0);
  }
  return q;
}

Qrels read_qrels(const std::filesystem::path& path) {
  auto in = detail::open_in(path, false);
  return read_qrels(in);
}

Run read_run(std::istream& in) {
  Run run;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto f = fields(line);
    if (f.empty()) continue;
    if (f.size() != 6) {
      throw line_error(line_no, "expected 'qid Q0 docid rank score tag'");
    }
    double score = 0.0;
    auto [ptr, ec] = std::from_chars(f[4].data(), f[4].data() + f[4].size(), score);
    if (ec != std::errc() || ptr != f[4].data() + f[4].size() ||
        !std::isfinite(score)) {
      throw line_error(line_no, "bad score '" + f[4] + "'");
    }
    run[f[0]].push_back({f[2], score});
  }
  try {
    normalize_run(run);
  } catch (const ValidationError& e) {
    throw FormatError(FormatError::Kind::kDuplicate, e.what());
  }
  return run;
}

Run read_run(const std::filesystem::path& path) {
  auto in = detail::open_in(path, false);
  return read_run(in);
}

void write_run(const Run& run, std::ostream& out, const std::string& tag) {
  char buf[32];
  for (const auto& [qid, entries] : run) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), entries[i].score);
      out << qid << " Q0 " << entries[i].doc_id << ' ' << (i + 1) << ' '
          << std::string_view(buf, static_cast<std::size_t>(ptr - buf)) << ' '
          << tag << '\n';
    }
  }
}

void write_run(const Run& run, const std::filesystem::path& path,
               const std::string& tag) {
  auto out = detail::open_out(path, false);
  write_run(run, out, tag);
  detail::finish_out(out, path);
}

Run run_from_results(std::span<const std::string> qids,
                     std::span<const TopKResult> results) {
  if (qids.size() != results.size()) {
    throw ValidationError("query ids and results differ in length");
  }
  Run run;
  for (std::size_t i = 0; i < qids.size(); ++i) {
    auto [it, inserted] = run.try_emplace(qids[i]);
    if (!inserted) throw ValidationError("duplicate query id " + qids[i]);
    for (const auto& h : results[i].hits) {
      it->second.push_back({std::to_string(h.doc), h.score});
    }
  }
  normalize_run(run);
  return run;
}

void write_metric_csv(std::span<const MetricReport> reports, std::ostream& out) {
  out << "metric,k,value,n_queries,n_skipped\n";
  out.precision(10);
  for (const auto& r : reports) {
    out << r.metric << ',' << r.k << ',' << r.value << ',' << r.n_queries << ','
        << r.n_skipped << '\n';
  }
}

}  // namespace lisr
