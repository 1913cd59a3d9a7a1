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

#include "lisr/synthetic.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <unordered_set>

#include "lisr/error.h"

namespace lisr {

namespace {

constexpr TokenId kFirstWordToken = 4;

float positive_float(double v) {
  const float f = static_cast<float>(v);
  return f > 0.0f ? f : std::numeric_limits<float>::min();
}

std::vector<float> random_embeddings(std::size_t rows, std::size_t dim,
                                     std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<float> data(rows * dim);
  for (auto& x : data) x = static_cast<float>(n(rng));
  return data;
}

TokenSequence random_query(const PlantedConfig& cfg, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> len(cfg.min_query_len,
                                                 cfg.max_query_len);
  std::uniform_int_distribution<TokenId> tok(kFirstWordToken,
                                             cfg.vocab_size - 1);
  std::bernoulli_distribution repeat(0.1);
  TokenSequence q;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) {
    q.push_back(tok(rng));
    if (repeat(rng)) q.push_back(q.back());
  }
  return q;
}

}  // namespace

Collection synthetic_collection(const SyntheticConfig& cfg) {
  if (cfg.vocab_size == 0 || cfg.avg_nnz < 1.0 ||
      cfg.avg_nnz > static_cast<double>(cfg.vocab_size)) {
    throw ValidationError("bad synthetic collection config");
  }
  std::mt19937_64 rng(cfg.seed);
  std::vector<double> cdf(cfg.vocab_size);
  double acc = 0.0;
  for (std::size_t r = 0; r < cfg.vocab_size; ++r) {
    acc += std::pow(static_cast<double>(r + 1), -cfg.zipf_exponent);
    cdf[r] = acc;
  }
  // Rank r maps to a scrambled token id so frequent tokens are spread out.
  std::vector<TokenId> rank_to_token(cfg.vocab_size);
  for (TokenId t = 0; t < cfg.vocab_size; ++t) rank_to_token[t] = t;
  std::shuffle(rank_to_token.begin(), rank_to_token.end(), rng);

  std::uniform_real_distribution<double> u(0.0, acc);
  // Uniform on [lo, 2 * avg - lo], so the mean is avg_nnz.
  const auto avg = static_cast<std::size_t>(std::llround(cfg.avg_nnz));
  const auto lo = std::max<std::size_t>(1, avg / 2);
  std::uniform_int_distribution<std::size_t> nnz_dist(
      lo, std::min<std::size_t>(2 * avg - lo, cfg.vocab_size));
  std::normal_distribution<double> noise(0.0, 0.5);
  const double log_v = std::log(static_cast<double>(cfg.vocab_size) + 1.0);

  Collection c(cfg.vocab_size);
  std::unordered_set<std::size_t> ranks;
  for (std::size_t d = 0; d < cfg.n_docs; ++d) {
    const std::size_t nnz = nnz_dist(rng);
    ranks.clear();
    std::vector<std::pair<TokenId, double>> pairs;
    while (ranks.size() < nnz) {
      const auto r = static_cast<std::size_t>(
          std::lower_bound(cdf.begin(), cdf.end(), u(rng)) - cdf.begin());
      const std::size_t rank = std::min<std::size_t>(r, cfg.vocab_size - 1);
      if (!ranks.insert(rank).second) continue;
      const double rarity = 1.0 + 2.0 * std::log1p(static_cast<double>(rank)) / log_v;
      pairs.emplace_back(rank_to_token[rank],
                         positive_float(std::exp(noise(rng)) * rarity));
    }
    c.add(SparseVector::from_pairs(std::move(pairs)));
  }
  return c;
}

std::vector<SparseVector> synthetic_queries(const Collection& docs,
                                            std::size_t n_queries,
                                            std::size_t nnz, std::uint64_t seed) {
  if (docs.empty()) throw ValidationError("cannot draw queries from no documents");
  if (nnz == 0) throw ValidationError("query nnz must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, docs.size() - 1);
  std::normal_distribution<double> noise(0.0, 0.5);
  std::vector<SparseVector> out;
  out.reserve(n_queries);
  for (std::size_t i = 0; i < n_queries; ++i) {
    std::set<TokenId> tokens;
    const auto& main = docs[static_cast<DocId>(pick(rng))];
    std::vector<std::size_t> order(main.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return main.weights()[a] > main.weights()[b];
    });
    const std::size_t from_main = std::min(order.size(), (3 * nnz + 3) / 4);
    for (std::size_t j = 0; j < from_main; ++j) tokens.insert(main.ids()[order[j]]);
    for (int attempt = 0; tokens.size() < nnz && attempt < 8; ++attempt) {
      const auto& other = docs[static_cast<DocId>(pick(rng))];
      std::uniform_int_distribution<std::size_t> pos(0, other.size() - 1);
      tokens.insert(other.ids()[pos(rng)]);
    }
    std::vector<std::pair<TokenId, double>> pairs;
    for (TokenId t : tokens) {
      pairs.emplace_back(t, positive_float(std::exp(noise(rng))));
    }
    out.push_back(SparseVector::from_pairs(std::move(pairs)));
  }
  return out;
}

ScoreTable PlantedModel::table() const {
  const auto specials = special_ids();
  return build_table(w, b, embeddings, specials);
}

PlantedModel planted_model(const PlantedConfig& cfg) {
  if (cfg.vocab_size <= kFirstWordToken + 1 || cfg.dim == 0 ||
      cfg.min_query_len == 0 || cfg.max_query_len < cfg.min_query_len ||
      cfg.doc_nnz == 0 || cfg.doc_nnz > cfg.vocab_size - kFirstWordToken) {
    throw ValidationError("bad planted model config");
  }
  std::mt19937_64 rng(cfg.seed);
  auto data = random_embeddings(cfg.vocab_size, cfg.dim, rng);

  std::vector<double> w(cfg.dim);
  std::normal_distribution<double> wn(0.0, 0.5 / std::sqrt(static_cast<double>(cfg.dim)));
  for (auto& x : w) x = wn(rng);
  // Bias keeps nearly every planted pre-activation positive, so the true
  // scores have no large block of ties at 0.
  const double b = 1.5;

  PlantedModel m{EmbeddingMatrix(cfg.vocab_size, cfg.dim, std::move(data)),
                 std::move(w), b, Collection(cfg.vocab_size), {}, {}, {}, {}};
  m.vocab = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
  for (TokenId t = kFirstWordToken; t < cfg.vocab_size; ++t) {
    m.vocab.push_back("w" + std::to_string(t));
  }

  std::uniform_int_distribution<TokenId> tok(kFirstWordToken, cfg.vocab_size - 1);
  std::uniform_real_distribution<double> weight(0.2, 2.0);
  for (std::size_t d = 0; d < cfg.n_docs; ++d) {
    std::set<TokenId> ids;
    while (ids.size() < cfg.doc_nnz) ids.insert(tok(rng));
    std::vector<std::pair<TokenId, double>> pairs;
    for (TokenId t : ids) pairs.emplace_back(t, positive_float(weight(rng)));
    m.docs.add(SparseVector::from_pairs(std::move(pairs)));
  }

  const ScoreTable truth = m.table();
  std::uniform_int_distribution<std::size_t> pick(0, cfg.n_docs - 1);
  while (m.triples.size() < cfg.n_triples) {
    TokenSequence q = random_query(cfg, rng);
    // Positive: a document sharing at least one query token.
    DocId pos = 0;
    bool found = false;
    for (int attempt = 0; attempt < 200 && !found; ++attempt) {
      pos = static_cast<DocId>(pick(rng));
      for (TokenId t : q) {
        if (m.docs[pos].weight_of(t) > 0.0) {
          found = true;
          break;
        }
      }
    }
    if (!found) continue;
    DocId neg = static_cast<DocId>(pick(rng));
    if (neg == pos) continue;
    double tp = 0.0;
    double tn = 0.0;
    for (TokenId t : q) {
      tp += truth.scores[t] * m.docs[pos].weight_of(t);
      tn += truth.scores[t] * m.docs[neg].weight_of(t);
    }
    if (tn > tp) {
      std::swap(pos, neg);
      std::swap(tp, tn);
    }
    m.triples.push_back({std::move(q), m.docs[pos], m.docs[neg], tp, tn});
    m.pos_ids.push_back(pos);
    m.neg_ids.push_back(neg);
  }
  return m;
}

TokenSequence planted_query(const PlantedConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_query(cfg, rng);
}

std::string query_text(const TokenSequence& tokens,
                       const std::vector<std::string>& vocab) {
  std::string out;
  for (TokenId t : tokens) {
    if (!out.empty()) out += ' ';
    out += vocab.at(t);
  }
  return out;
}

}  // namespace lisr
