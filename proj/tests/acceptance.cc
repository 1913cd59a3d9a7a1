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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Each check compares against an independent reference computation.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "lisr/collection.h"
#include "lisr/encoder.h"
#include "lisr/eval.h"
#include "lisr/fitter.h"
#include "lisr/index.h"
#include "lisr/search.h"
#include "lisr/synthetic.h"
#include "oracles.h"

using namespace lisr;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. With exact summaries and a safe threshold, approximate search returns
//    the exhaustive top 10.

Outcome safe_pruning() {
  SyntheticConfig sc;
  sc.n_docs = 10000;
  sc.vocab_size = 30000;
  sc.avg_nnz = 60.0;
  sc.seed = 11;
  auto docs = std::make_shared<const Collection>(synthetic_collection(sc));
  const auto queries = synthetic_queries(*docs, 200, 24, 12);
  BuildConfig bc;
  bc.alpha = 1.0;
  bc.max_postings = 10000;
  const auto ix = build_index(docs, bc);
  SearchParams p;
  p.k = 10;
  p.heap_factor = 1.0;
  Searcher s(*docs);
  std::size_t mismatched = 0;
  double worst = 0.0;
  for (const auto& q : queries) {
    const auto exact = s.exhaustive(q, 10);
    const auto approx = s.approximate(q, ix, p);
    bool same = exact.hits.size() == approx.hits.size();
    for (std::size_t i = 0; same && i < exact.hits.size(); ++i) {
      const double diff = std::abs(exact.hits[i].score - approx.hits[i].score);
      worst = std::max(worst, diff);
      same = exact.hits[i].doc == approx.hits[i].doc && diff <= 1e-6;
    }
    if (!same) ++mismatched;
  }
  return {mismatched == 0,
          fmt("avg nnz %.1f, %zu/200 queries differ, max score gap %.2g",
              collection_stats(*docs).avg_nnz, mismatched, worst)};
}

// ---------------------------------------------------------------------------
// 2. Recall grows with the posting budget, and the best setting still beats
//    exhaustive search on time.

Outcome tradeoff_shape() {
  SyntheticConfig sc;
  sc.n_docs = 50000;
  sc.vocab_size = 30000;
  sc.avg_nnz = 60.0;
  sc.seed = 21;
  auto docs = std::make_shared<const Collection>(synthetic_collection(sc));
  const auto queries = synthetic_queries(*docs, 200, 24, 22);
  SearchParams p;
  p.k = 10;
  p.heap_factor = 1.0;
  const auto exact = bench_aqt(queries, SearchMode::kExhaustive, *docs, nullptr, p);

  std::vector<double> recall;
  std::optional<InvertedIndex> best_ix;
  std::string detail;
  for (std::uint32_t lambda : {2000u, 4000u, 6000u, 8000u}) {
    BuildConfig bc;
    bc.max_postings = lambda;
    bc.alpha = 0.4;
    bc.centroid_fraction = 0.1;
    auto ix = build_index(docs, bc);
    const auto r = bench_aqt(queries, SearchMode::kApproximate, *docs, &ix, p);
    double hit = 0.0;
    for (std::size_t i = 0; i < queries.size(); ++i) {
      std::set<DocId> truth;
      for (const auto& h : exact.results[i].hits) truth.insert(h.doc);
      for (const auto& h : r.results[i].hits) hit += truth.count(h.doc);
    }
    const double rec = hit / (10.0 * static_cast<double>(queries.size()));
    if (recall.empty() || rec > *std::max_element(recall.begin(), recall.end())) {
      best_ix.emplace(std::move(ix));
    }
    recall.push_back(rec);
    detail += fmt("l=%u r=%.4f %.0fus; ", lambda, rec, r.aqt_us);
  }
  int inversions = 0;
  bool small = true;
  for (std::size_t i = 1; i < recall.size(); ++i) {
    if (recall[i] < recall[i - 1]) {
      ++inversions;
      small = small && recall[i - 1] - recall[i] <= 0.002;
    }
  }
  // Timing on a shared machine is noisy: alternate the two modes and keep the
  // best of three for each.
  double exact_us = exact.aqt_us, approx_us = 1e300;
  for (int rep = 0; rep < 3; ++rep) {
    approx_us = std::min(
        approx_us, bench_aqt(queries, SearchMode::kApproximate, *docs, &*best_ix, p).aqt_us);
    if (rep > 0) {
      exact_us = std::min(
          exact_us, bench_aqt(queries, SearchMode::kExhaustive, *docs, nullptr, p).aqt_us);
    }
  }
  const bool faster = approx_us < exact_us;
  detail += fmt("best-recall point %.0fus vs exhaustive %.0fus", approx_us, exact_us);
  return {inversions <= 1 && small && faster, detail};
}

// ---------------------------------------------------------------------------
// 3. Analytic gradients against central differences.

struct GradProblem {
  EmbeddingMatrix e;
  std::vector<TrainTriple> batch;
};

GradProblem grad_problem(std::mt19937_64& rng, std::size_t vocab, std::size_t dim) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  std::vector<float> data(vocab * dim);
  for (auto& x : data) x = n(rng);
  GradProblem p{EmbeddingMatrix(vocab, dim, std::move(data)), {}};
  std::normal_distribution<double> teacher(0.0, 2.0);
  for (int i = 0; i < 8; ++i) {
    TrainTriple t;
    const std::size_t len = 1 + rng() % 4;
    for (std::size_t j = 0; j < len; ++j) {
      t.query_tokens.push_back(static_cast<TokenId>(rng() % vocab));
    }
    t.pos_doc = oracle::random_vector(rng, vocab, 1 + rng() % (vocab / 2));
    t.neg_doc = oracle::random_vector(rng, vocab, 1 + rng() % (vocab / 2));
    t.teacher_pos = teacher(rng);
    t.teacher_neg = teacher(rng);
    p.batch.push_back(std::move(t));
  }
  return p;
}

Outcome gradient_check() {
  std::mt19937_64 rng(31);
  const double h = 1e-5;
  const std::size_t vocab = 30, dim = 6;
  double worst = 0.0;
  int instances = 0;
  for (RankLoss loss : {RankLoss::kKl, RankLoss::kMarginMse}) {
    for (Regularizer reg : {Regularizer::kL1, Regularizer::kFlops}) {
      FitConfig cfg;
      cfg.loss = loss;
      cfg.reg = reg;
      cfg.lambda_q = 0.3;
      cfg.lambda_d = 0.7;
      int accepted = 0;
      while (accepted < 10) {
        const auto p = grad_problem(rng, vocab, dim);
        std::uniform_real_distribution<double> u(-0.8, 0.8);
        std::vector<double> w(dim);
        for (auto& x : w) x = u(rng);
        const double b = u(rng) * 0.5;
        // Keep every used pre-activation well clear of the ReLU kink.
        bool near_kink = false;
        for (const auto& t : p.batch) {
          for (TokenId x : t.query_tokens) {
            double z = b;
            for (std::size_t i = 0; i < dim; ++i) z += w[i] * p.e.row(x)[i];
            near_kink = near_kink || std::abs(z) <= 1e-3;
          }
        }
        if (near_kink) continue;
        ++accepted;
        const std::span<const TrainTriple> batch(p.batch);
        auto total = [&](std::span<const double> ww, double bb) {
          return evaluate_objective(batch, ww, bb, cfg, p.e).loss.total;
        };
        auto rel = [](double a, double n) {
          return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-8});
        };
        const auto obj = evaluate_objective(batch, w, b, cfg, p.e);
        for (std::size_t i = 0; i < dim; ++i) {
          auto plus = w, minus = w;
          plus[i] += h;
          minus[i] -= h;
          const double fd = (total(plus, b) - total(minus, b)) / (2 * h);
          worst = std::max(worst, rel(obj.grad_w[i], fd));
        }
        const double fd_b = (total(w, b + h) - total(w, b - h)) / (2 * h);
        worst = std::max(worst, rel(obj.grad_b, fd_b));
        ++instances;
      }
    }
  }
  return {worst <= 1e-4, fmt("%d instances, max relative error %.2g", instances, worst)};
}

// ---------------------------------------------------------------------------
// 4 and 5 share the planted task.

PlantedConfig planted_config() {
  PlantedConfig pc;
  pc.vocab_size = 200;
  pc.dim = 16;
  pc.n_triples = 2000;
  return pc;
}

std::vector<TokenId> covered_tokens(const PlantedModel& m) {
  std::set<TokenId> seen;
  for (const auto& t : m.triples) seen.insert(t.query_tokens.begin(), t.query_tokens.end());
  return {seen.begin(), seen.end()};
}

// Held-out queries with at least one positive planted match.
std::vector<TokenSequence> held_out(const PlantedConfig& pc, const PlantedModel& m,
                                    std::size_t n) {
  const auto truth = m.table();
  std::vector<TokenSequence> out;
  for (std::uint64_t seed = 900000; out.size() < n; ++seed) {
    auto q = planted_query(pc, seed);
    try {
      const auto top = search_exhaustive(encode_query(q, truth), m.docs, 1);
      if (!top.hits.empty() && top.hits[0].score > 0.0) out.push_back(std::move(q));
    } catch (const EmptyQueryError&) {
    }
  }
  return out;
}

FitConfig planted_fit_config() {
  FitConfig cfg;
  cfg.loss = RankLoss::kKl;
  cfg.reg = Regularizer::kL1;
  cfg.lambda_q = 0.0;
  cfg.lr = 0.05;
  cfg.batch_size = 64;
  cfg.steps = 5000;
  cfg.seed = 41;
  return cfg;
}

Outcome planted_recovery() {
  const auto pc = planted_config();
  const auto m = planted_model(pc);
  const auto cfg = planted_fit_config();
  const auto r = fit(m.triples, m.embeddings, cfg, m.special_ids());
  const auto truth = m.table();

  std::vector<double> fitted_scores, true_scores;
  for (TokenId x : covered_tokens(m)) {
    fitted_scores.push_back(r.table.scores[x]);
    true_scores.push_back(truth.scores[x]);
  }
  const double rho = oracle::spearman(fitted_scores, true_scores);

  // The planted encoder's best document is the one relevant answer.
  const auto queries = held_out(pc, m, 100);
  Run run;
  Qrels qrels;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const std::string qid = "h" + std::to_string(i);
    const auto top = search_exhaustive(encode_query(queries[i], truth), m.docs, 1);
    qrels[qid][std::to_string(top.hits[0].doc)] = 1;
    auto& entries = run[qid];
    try {
      for (const auto& h : search_exhaustive(encode_query(queries[i], r.table), m.docs, 10).hits) {
        entries.push_back({std::to_string(h.doc), h.score});
      }
    } catch (const EmptyQueryError&) {
    }
  }
  normalize_run(run);
  const double mrr = mrr_at_k(run, qrels, 10).value;
  return {rho >= 0.99 && mrr >= 0.95,
          fmt("%zu steps, spearman %.4f over %zu tokens, mrr@10 %.4f", cfg.steps, rho,
              fitted_scores.size(), mrr)};
}

Outcome regularization_direction() {
  const auto pc = planted_config();
  const auto m = planted_model(pc);
  const auto covered = covered_tokens(m);
  const auto queries = held_out(pc, m, 100);
  struct Summary {
    double mean_score = 0.0;
    double mean_nnz = 0.0;
  };
  auto run = [&](double lambda_q) {
    auto cfg = planted_fit_config();
    cfg.steps = 2000;
    cfg.lambda_q = lambda_q;
    const auto r = fit(m.triples, m.embeddings, cfg, m.special_ids());
    Summary s;
    for (TokenId x : covered) s.mean_score += r.table.scores[x];
    s.mean_score /= static_cast<double>(covered.size());
    for (const auto& q : queries) {
      try {
        s.mean_nnz += static_cast<double>(encode_query(q, r.table).size());
      } catch (const EmptyQueryError&) {
      }
    }
    s.mean_nnz /= static_cast<double>(queries.size());
    return s;
  };
  const double base = 0.001;
  const auto lo = run(base);
  const auto hi = run(100 * base);
  const bool score_drop = hi.mean_score <= 0.5 * lo.mean_score;
  const bool nnz_drop = hi.mean_nnz < lo.mean_nnz;
  return {score_drop && nnz_drop,
          fmt("lambda_q %.3g -> %.3g: mean score %.4f -> %.4f, query nnz %.2f -> %.2f", base,
              100 * base, lo.mean_score, hi.mean_score, lo.mean_nnz, hi.mean_nnz)};
}

// ---------------------------------------------------------------------------
// 6. Metric hand values and properties.

Run ranked(const std::string& qid, const std::vector<std::string>& docs) {
  Run r;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    r[qid].push_back({docs[i], static_cast<double>(docs.size() - i)});
  }
  return r;
}

Outcome metric_oracles() {
  std::vector<std::string> failures;
  auto expect = [&](const char* what, double got, double want) {
    if (std::abs(got - want) > 1e-6) failures.push_back(fmt("%s=%.9f want %.9f", what, got, want));
  };
  // q1 relevant at 1, q2 at 2, q3 only at 11, q4 graded (0, 2, 1), q5 unjudged.
  Run run;
  auto add = [&](const std::string& q, const std::vector<std::string>& docs) {
    run[q] = ranked(q, docs)[q];
  };
  add("q1", {"r", "a", "b"});
  add("q2", {"a", "r", "b"});
  add("q3", {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "r"});
  add("q4", {"a", "x", "y"});
  add("q5", {"a", "b"});
  normalize_run(run);
  Qrels qrels{{"q1", {{"r", 1}}},
              {"q2", {{"r", 1}}},
              {"q3", {{"r", 1}}},
              {"q4", {{"x", 2}, {"y", 1}}}};
  const auto m = mrr_at_k(run, qrels, 10);
  const auto n = ndcg_at_k(run, qrels, 10);
  // mRR: (1 + 1/2 + 0 + 1/2) / 4.
  expect("mrr", m.value, 0.5);
  // nDCG: q2 = 1/log2(3); q4 = (3/log2(3) + 1/log2(4)) / (3 + 1/log2(3)).
  expect("ndcg", n.value, (1.0 + 0.6309297535714575 + 0.0 + 0.6590018048024133) / 4.0);
  Run first3;
  for (const char* q : {"q1", "q2", "q3"}) first3[q] = run[q];
  expect("mrr3", mrr_at_k(first3, qrels, 10).value, 0.5);
  expect("ndcg_q2", ndcg_at_k(Run{{"q2", run["q2"]}}, qrels, 10).value, 0.6309297535714575);
  if (m.n_queries != 4 || m.n_skipped != 1) failures.push_back("mrr skip count");
  if (n.n_queries != 4 || n.n_skipped != 1) failures.push_back("ndcg skip count");

  // Properties over random runs.
  std::mt19937_64 rng(61);
  std::size_t violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t len = 2 + rng() % 20;
    std::vector<std::string> docs;
    Qrels q;
    for (std::size_t i = 0; i < len; ++i) {
      docs.push_back(std::to_string(i));
      if (rng() % 3 == 0) q["q"][docs.back()] = static_cast<int>(rng() % 4);
    }
    q["q"]["missing"] = 1;
    std::shuffle(docs.begin(), docs.end(), rng);
    auto grade = [&](const std::string& d) {
      const auto it = q["q"].find(d);
      return it == q["q"].end() ? 0 : it->second;
    };
    const Run base = ranked("q", docs);
    const double rr = mrr_at_k(base, q).value;
    const double nd = ndcg_at_k(base, q).value;
    if (rr < 0.0 || rr > 1.0 || nd < 0.0 || nd > 1.0 + 1e-12) ++violations;

    // Shuffle everything below the first relevant document.
    std::size_t first = docs.size();
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (grade(docs[i]) >= 1) {
        first = i;
        break;
      }
    }
    if (first + 1 < docs.size()) {
      auto tail = docs;
      std::shuffle(tail.begin() + static_cast<long>(first) + 1, tail.end(), rng);
      if (mrr_at_k(ranked("q", tail), q).value != rr) ++violations;
    }

    // Order-preserving score transform.
    Run warped = base;
    for (auto& e : warped["q"]) e.score = std::exp(0.3 * e.score) - 7.0;
    normalize_run(warped);
    if (std::abs(ndcg_at_k(warped, q).value - nd) > 1e-12) ++violations;

    // Move a document above a neighbour of strictly lower grade.
    const std::size_t pos = 1 + rng() % (docs.size() - 1);
    if (grade(docs[pos]) > grade(docs[pos - 1])) {
      auto up = docs;
      std::swap(up[pos], up[pos - 1]);
      if (mrr_at_k(ranked("q", up), q).value < rr) ++violations;
      if (ndcg_at_k(ranked("q", up), q).value < nd - 1e-15) ++violations;
    }
  }
  if (violations) failures.push_back(fmt("%zu property violations", violations));
  std::string detail = "5-query fixture and 1000 random runs";
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

// ---------------------------------------------------------------------------
// 7. Footprint accounting.

Outcome footprint() {
  std::mt19937_64 rng(71);
  Collection one(30000);
  one.add(oracle::random_vector(rng, 30000, 384));
  const auto s1 = collection_stats(one);
  const auto many = oracle::random_collection(rng, 500, 30000, 200);
  const auto s2 = collection_stats(many);
  const bool ok = s1.footprint_bytes == 1536 && s2.footprint_bytes == 4 * s2.total_nnz &&
                  kFootprintBytesPerEntry == 4;
  return {ok, fmt("384-nnz doc = %zu bytes; %zu entries = %zu bytes", s1.footprint_bytes,
                  s2.total_nnz, s2.footprint_bytes)};
}

// ---------------------------------------------------------------------------
// 8. Table lookup against the direct formula.

Outcome encoder_consistency() {
  std::mt19937_64 rng(81);
  double worst = 0.0;
  std::size_t structural = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t vocab = 10 + rng() % 60;
    const std::size_t dim = 1 + rng() % 16;
    std::normal_distribution<float> en(0.0f, 1.0f);
    std::vector<float> data(vocab * dim);
    for (auto& x : data) x = en(rng);
    const EmbeddingMatrix e(vocab, dim, std::move(data));
    std::normal_distribution<double> wn(0.0, 1.0);
    std::vector<double> w(dim);
    for (auto& x : w) x = wn(rng);
    const double b = wn(rng);
    TokenSequence q;
    const std::size_t len = 1 + rng() % 12;
    for (std::size_t i = 0; i < len; ++i) {
      q.push_back(static_cast<TokenId>(rng() % vocab));
      if (rng() % 4 == 0) q.push_back(q.back());
    }
    // Direct path, computed here from the scoring formula.
    std::vector<double> direct(vocab, 0.0);
    for (TokenId x : q) {
      double z = b;
      for (std::size_t i = 0; i < dim; ++i) z += w[i] * static_cast<double>(e.row(x)[i]);
      direct[x] += std::log1p(std::max(0.0, z));
    }
    IdfTable idf{std::vector<double>(vocab), 100};
    std::uniform_real_distribution<double> iu(0.0, 5.0);
    for (auto& x : idf.idf) x = iu(rng);
    const IdfTable ones{std::vector<double>(vocab, 1.0), 100};

    const auto table = build_table(w, b, e);
    auto compare = [&](const ScoreTable& t, const std::vector<double>& want) {
      SparseVector got;
      try {
        got = encode_query(q, t);
      } catch (const EmptyQueryError&) {
      }
      std::size_t positive = 0;
      for (std::size_t x = 0; x < vocab; ++x) {
        worst = std::max(worst, std::abs(got.weight_of(static_cast<TokenId>(x)) - want[x]));
        if (want[x] > 0.0) ++positive;
      }
      if (got.size() != positive) ++structural;
    };
    compare(table, direct);
    const auto same = combine_idf(table, ones);
    if (same.scores != table.scores) ++structural;
    compare(same, direct);
    auto weighted = direct;
    for (std::size_t x = 0; x < vocab; ++x) weighted[x] *= idf.idf[x];
    compare(combine_idf(table, idf), weighted);
    // The parameter path used in training must agree with the table as well.
    const auto from_params = encode_query_from_params(q, w, b, e);
    for (std::size_t x = 0; x < vocab; ++x) {
      worst = std::max(worst,
                       std::abs(from_params.weight_of(static_cast<TokenId>(x)) - direct[x]));
    }
  }
  return {worst <= 1e-6 && structural == 0,
          fmt("1000 draws, max gap %.2g, %zu support mismatches", worst, structural)};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // 0 = no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "safe pruning equals exhaustive search", 60.0, safe_pruning},
      {2, "recall/latency trade-off shape", 600.0, tradeoff_shape},
      {3, "gradients match finite differences", 0.0, gradient_check},
      {4, "planted model recovery", 120.0, planted_recovery},
      {5, "regularization lowers scores and query nnz", 120.0, regularization_direction},
      {6, "metric oracles and properties", 0.0, metric_oracles},
      {7, "footprint constants", 0.0, footprint},
      {8, "table lookup matches direct encoding", 0.0, encoder_consistency},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool pass = o.pass;
    if (c.limit_s > 0.0 && secs > c.limit_s) {
      pass = false;
      o.detail += fmt("; over the %.0fs limit", c.limit_s);
    }
    if (!pass) ++failed;
    std::printf("%s criterion %d: %s (%s) [%.1fs]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
