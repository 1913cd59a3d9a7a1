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

#include "lisr/index.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "binary_io.h"
#include "lisr/error.h"

namespace lisr {

namespace {

constexpr std::string_view kMagic = "LSRI";
constexpr std::uint32_t kVersion = 1;
constexpr int kClusterRounds = 3;

// ceil() that ignores representation error in fraction * length.
std::size_t centroid_count(double fraction, std::size_t length) {
  const double raw = std::ceil(fraction * static_cast<double>(length) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)),
                                 1, length);
}

// Token ids of one list's documents re-expressed over a dense local token
// space, stored back to back. Weights stay in the source vectors.
struct LocalDocs {
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> offsets;
  std::size_t n_tokens = 0;

  std::span<const std::uint32_t> doc(std::size_t i) const {
    return std::span<const std::uint32_t>(ids).subspan(offsets[i],
                                                       offsets[i + 1] - offsets[i]);
  }
};

LocalDocs localize(std::span<const SparseVector* const> docs) {
  // Local ids follow first appearance; the numbering does not affect results.
  thread_local std::vector<std::int32_t> to_local;
  std::vector<TokenId> seen;
  LocalDocs out;
  out.offsets.reserve(docs.size() + 1);
  out.offsets.push_back(0);
  for (const auto* d : docs) {
    const auto ids = d->ids();
    if (!ids.empty() && ids.back() >= to_local.size()) {
      to_local.resize(static_cast<std::size_t>(ids.back()) + 1, -1);
    }
    for (TokenId t : ids) {
      if (to_local[t] < 0) {
        to_local[t] = static_cast<std::int32_t>(seen.size());
        seen.push_back(t);
      }
      out.ids.push_back(static_cast<std::uint32_t>(to_local[t]));
    }
    out.offsets.push_back(out.ids.size());
  }
  for (TokenId t : seen) to_local[t] = -1;
  out.n_tokens = seen.size();
  return out;
}

struct Centroid {
  std::vector<std::uint32_t> ids;
  std::vector<double> weights;
};

}  // namespace

void BuildConfig::validate() const {
  if (max_postings < 1) throw ValidationError("lambda must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ValidationError("alpha must be in (0, 1]");
  }
  if (!(centroid_fraction > 0.0 && centroid_fraction <= 1.0)) {
    throw ValidationError("centroid fraction must be in (0, 1]");
  }
}

std::size_t PostingList::posting_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.doc_ids.size();
  return n;
}

InvertedIndex::InvertedIndex(std::shared_ptr<const Collection> forward,
                             BuildConfig config, std::vector<PostingList> lists)
    : forward_(std::move(forward)),
      config_(config),
      lists_(std::move(lists)),
      slot_(forward_->vocab_size(), -1) {
  for (std::size_t i = 0; i < lists_.size(); ++i) {
    slot_[lists_[i].token] = static_cast<std::int32_t>(i);
  }
}

const PostingList* InvertedIndex::find(TokenId token) const {
  if (token >= slot_.size() || slot_[token] < 0) return nullptr;
  return &lists_[static_cast<std::size_t>(slot_[token])];
}

std::vector<std::vector<std::size_t>> cluster_postings(
    std::span<const SparseVector* const> docs, std::size_t n_centroids,
    std::uint64_t /*seed*/) {
  const std::size_t m = docs.size();
  if (m == 0) return {};
  if (n_centroids == 0) throw ValidationError("n_centroids must be >= 1");
  const std::size_t n = std::min(n_centroids, m);
  if (n == 1) {
    std::vector<std::size_t> all(m);
    std::iota(all.begin(), all.end(), 0);
    return {std::move(all)};
  }
  if (n == m) {
    std::vector<std::vector<std::size_t>> singletons(m);
    for (std::size_t i = 0; i < m; ++i) singletons[i] = {i};
    return singletons;
  }

  const LocalDocs local = localize(docs);
  std::vector<Centroid> centroids(n);
  for (std::size_t c = 0; c < n; ++c) {
    const auto ids = local.doc(c);
    const auto ws = docs[c]->weights();
    centroids[c] = {{ids.begin(), ids.end()}, {ws.begin(), ws.end()}};
  }

  std::vector<std::size_t> assignment(m, 0);
  std::vector<double> best_sim(m, 0.0);
  // Tokens held by many centroids get a dense row over all centroids, so the
  // bulk of the similarity work is a contiguous multiply-add. The rest use
  // sparse (centroid, weight) lists.
  std::vector<std::vector<std::pair<std::uint32_t, float>>> inverted(
      local.n_tokens);
  std::vector<std::int32_t> dense_row(local.n_tokens, -1);
  std::vector<float> rows;
  std::vector<std::uint32_t> holders(local.n_tokens, 0);
  std::vector<float> sims(n, 0.0f);
  std::vector<double> dense(local.n_tokens, 0.0);
  std::vector<std::uint8_t> dense_used(local.n_tokens, 0);
  std::vector<std::uint32_t> dense_touched;

  for (int round = 0; round < kClusterRounds; ++round) {
    std::fill(holders.begin(), holders.end(), 0);
    for (const auto& cen : centroids) {
      for (std::uint32_t t : cen.ids) ++holders[t];
    }
    std::int32_t n_rows = 0;
    for (std::size_t t = 0; t < local.n_tokens; ++t) {
      dense_row[t] = holders[t] * 8 >= n ? n_rows++ : -1;
      inverted[t].clear();
    }
    rows.assign(static_cast<std::size_t>(n_rows) * n, 0.0f);
    for (std::size_t c = 0; c < n; ++c) {
      const auto& cen = centroids[c];
      for (std::size_t j = 0; j < cen.ids.size(); ++j) {
        const std::uint32_t t = cen.ids[j];
        if (dense_row[t] >= 0) {
          rows[static_cast<std::size_t>(dense_row[t]) * n + c] =
              static_cast<float>(cen.weights[j]);
        } else {
          inverted[t].emplace_back(static_cast<std::uint32_t>(c),
                                   static_cast<float>(cen.weights[j]));
        }
      }
    }

    // Assignment: highest dot product, ties to the lower centroid index.
    for (std::size_t i = 0; i < m; ++i) {
      const auto ids = local.doc(i);
      const auto ws = docs[i]->weights();
      std::fill(sims.begin(), sims.end(), 0.0f);
      for (std::size_t j = 0; j < ids.size(); ++j) {
        const auto w = static_cast<float>(ws[j]);
        if (dense_row[ids[j]] >= 0) {
          const float* row =
              rows.data() + static_cast<std::size_t>(dense_row[ids[j]]) * n;
          for (std::size_t c = 0; c < n; ++c) sims[c] += w * row[c];
        } else {
          for (const auto& [c, cw] : inverted[ids[j]]) sims[c] += w * cw;
        }
      }
      const auto best = static_cast<std::size_t>(
          std::max_element(sims.begin(), sims.end()) - sims.begin());
      assignment[i] = best;
      best_sim[i] = sims[best];
    }

    // Refill empty clusters with the point farthest from its centroid.
    std::vector<std::size_t> sizes(n, 0);
    for (std::size_t a : assignment) ++sizes[a];
    for (std::size_t c = 0; c < n; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t pick = m;
      for (std::size_t i = 0; i < m; ++i) {
        if (sizes[assignment[i]] < 2) continue;
        if (pick == m || best_sim[i] < best_sim[pick]) pick = i;
      }
      --sizes[assignment[pick]];
      assignment[pick] = c;
      best_sim[pick] = std::numeric_limits<double>::infinity();
      sizes[c] = 1;
    }

    if (round + 1 == kClusterRounds) break;

    // Update: centroid = mean of its members.
    std::vector<std::vector<std::size_t>> members(n);
    for (std::size_t i = 0; i < m; ++i) members[assignment[i]].push_back(i);
    for (std::size_t c = 0; c < n; ++c) {
      for (std::size_t i : members[c]) {
        const auto ids = local.doc(i);
        const auto ws = docs[i]->weights();
        for (std::size_t j = 0; j < ids.size(); ++j) {
          if (!dense_used[ids[j]]) {
            dense_used[ids[j]] = 1;
            dense_touched.push_back(ids[j]);
          }
          dense[ids[j]] += ws[j];
        }
      }
      const double inv = 1.0 / static_cast<double>(members[c].size());
      Centroid& cen = centroids[c];
      cen.ids.assign(dense_touched.begin(), dense_touched.end());
      cen.weights.resize(cen.ids.size());
      for (std::size_t j = 0; j < cen.ids.size(); ++j) {
        cen.weights[j] = dense[cen.ids[j]] * inv;
        dense[cen.ids[j]] = 0.0;
        dense_used[cen.ids[j]] = 0;
      }
      dense_touched.clear();
    }
  }

  std::vector<std::vector<std::size_t>> groups(n);
  for (std::size_t i = 0; i < m; ++i) groups[assignment[i]].push_back(i);
  std::erase_if(groups, [](const auto& g) { return g.empty(); });
  return groups;
}

std::vector<std::vector<std::size_t>> cluster_postings(
    std::span<const SparseVector> docs, std::size_t n_centroids,
    std::uint64_t seed) {
  std::vector<const SparseVector*> ptrs;
  ptrs.reserve(docs.size());
  for (const auto& d : docs) ptrs.push_back(&d);
  return cluster_postings(std::span<const SparseVector* const>(ptrs),
                          n_centroids, seed);
}

SparseVector build_summary(std::span<const SparseVector* const> docs,
                           double alpha) {
  // Coordinate-wise maximum through a dense scratch row; weights are
  // positive, so 0 marks an untouched slot.
  thread_local std::vector<double> scratch;
  thread_local std::vector<TokenId> touched;
  touched.clear();
  for (const auto* d : docs) {
    const auto ids = d->ids();
    const auto ws = d->weights();
    if (!ids.empty() && ids.back() >= scratch.size()) {
      scratch.resize(static_cast<std::size_t>(ids.back()) + 1, 0.0);
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      double& slot = scratch[ids[i]];
      if (slot == 0.0) touched.push_back(ids[i]);
      slot = std::max(slot, ws[i]);
    }
  }
  std::sort(touched.begin(), touched.end());
  std::vector<std::pair<TokenId, double>> maxima;
  maxima.reserve(touched.size());
  for (TokenId t : touched) {
    maxima.emplace_back(t, scratch[t]);
    scratch[t] = 0.0;
  }
  if (alpha >= 1.0) return SparseVector::from_pairs(std::move(maxima));

  // Smallest heaviest prefix reaching the target mass, found by repeated
  // selection instead of a full sort. Heavier means larger weight, then
  // lower token id.
  auto by_weight = std::move(maxima);
  const auto heavier = [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  };
  double total = 0.0;
  for (const auto& e : by_weight) total += e.second;
  const double target = alpha * total * (1.0 - 1e-12);
  // Invariant: prefix(lo) < target <= prefix(hi), and [0, lo) holds the lo
  // heaviest entries.
  std::size_t lo = 0;
  std::size_t hi = by_weight.size();
  double acc = 0.0;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(by_weight.begin() + static_cast<std::ptrdiff_t>(lo),
                     by_weight.begin() + static_cast<std::ptrdiff_t>(mid),
                     by_weight.begin() + static_cast<std::ptrdiff_t>(hi), heavier);
    double part = 0.0;
    for (std::size_t i = lo; i < mid; ++i) part += by_weight[i].second;
    if (acc + part >= target) {
      hi = mid;
    } else {
      acc += part;
      lo = mid;
    }
  }
  const std::size_t keep = hi;
  by_weight.resize(std::max<std::size_t>(keep, 1));
  return SparseVector::from_pairs(std::move(by_weight));
}

SparseVector build_summary(std::span<const SparseVector> docs, double alpha) {
  std::vector<const SparseVector*> ptrs;
  ptrs.reserve(docs.size());
  for (const auto& d : docs) ptrs.push_back(&d);
  return build_summary(std::span<const SparseVector* const>(ptrs), alpha);
}

InvertedIndex build_index(std::shared_ptr<const Collection> c,
                          const BuildConfig& cfg) {
  cfg.validate();
  const Collection& docs = *c;

  struct Posting {
    double weight;
    DocId doc;
  };
  std::vector<std::vector<Posting>> postings(docs.vocab_size());
  for (DocId d = 0; d < docs.size(); ++d) {
    const auto ids = docs[d].ids();
    const auto ws = docs[d].weights();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      postings[ids[i]].push_back({ws[i], d});
    }
  }

  std::vector<PostingList> lists;
  std::vector<const SparseVector*> impact_docs;
  std::vector<const SparseVector*> block_docs;
  for (TokenId t = 0; t < postings.size(); ++t) {
    auto& plist = postings[t];
    if (plist.empty()) continue;
    // Impact order; equal weights keep the lower doc id.
    std::sort(plist.begin(), plist.end(), [](const Posting& a, const Posting& b) {
      if (a.weight != b.weight) return a.weight > b.weight;
      return a.doc < b.doc;
    });
    if (plist.size() > cfg.max_postings) plist.resize(cfg.max_postings);

    impact_docs.clear();
    for (const auto& p : plist) impact_docs.push_back(&docs[p.doc]);
    const auto groups =
        cluster_postings(std::span<const SparseVector* const>(impact_docs),
                         centroid_count(cfg.centroid_fraction, plist.size()),
                         cfg.seed);

    PostingList list;
    list.token = t;
    list.blocks.reserve(groups.size());
    for (const auto& g : groups) {
      Block block;
      block_docs.clear();
      for (std::size_t i : g) {
        block.doc_ids.push_back(plist[i].doc);
        block_docs.push_back(impact_docs[i]);
      }
      std::sort(block.doc_ids.begin(), block.doc_ids.end());
      block.summary = build_summary(
          std::span<const SparseVector* const>(block_docs), cfg.alpha);
      list.blocks.push_back(std::move(block));
    }
    lists.push_back(std::move(list));
    std::vector<Posting>().swap(plist);
  }
  return InvertedIndex(std::move(c), cfg, std::move(lists));
}

IndexStats index_stats(const InvertedIndex& ix) {
  IndexStats s;
  double retained = 0.0;
  double unpruned = 0.0;
  s.bytes = 4 + 4 + 4 + 4 + 4 + 8;
  std::vector<const SparseVector*> block_docs;
  for (const auto& list : ix.lists()) {
    ++s.n_lists;
    s.bytes += 8;
    for (const auto& block : list.blocks) {
      ++s.n_blocks;
      s.n_postings += block.doc_ids.size();
      s.summary_nnz += block.summary.size();
      s.bytes += 4 + 4 * block.doc_ids.size() + 4 + 8 * block.summary.size();
      retained += l1_norm(block.summary);
      block_docs.clear();
      for (DocId d : block.doc_ids) block_docs.push_back(&ix.forward()[d]);
      unpruned += l1_norm(
          build_summary(std::span<const SparseVector* const>(block_docs), 1.0));
    }
  }
  s.summary_mass_retained = unpruned > 0.0 ? retained / unpruned : 1.0;
  return s;
}

namespace {

// Summary weights are upper bounds, so narrowing must round toward +inf.
float round_up_to_float(double w) {
  float f = static_cast<float>(w);
  if (static_cast<double>(f) < w) {
    f = std::nextafter(f, std::numeric_limits<float>::infinity());
  }
  return f;
}

}  // namespace

void write_index(const InvertedIndex& ix, std::ostream& out) {
  const auto& cfg = ix.config();
  detail::put_magic(out, kMagic);
  detail::put<std::uint32_t>(out, kVersion);
  detail::put<std::uint32_t>(out, cfg.max_postings);
  detail::put<float>(out, static_cast<float>(cfg.alpha));
  detail::put<float>(out, static_cast<float>(cfg.centroid_fraction));
  detail::put<std::uint64_t>(out, cfg.seed);
  for (const auto& list : ix.lists()) {
    detail::put<std::uint32_t>(out, list.token);
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(list.blocks.size()));
    for (const auto& block : list.blocks) {
      detail::put<std::uint32_t>(out,
                                 static_cast<std::uint32_t>(block.doc_ids.size()));
      for (DocId d : block.doc_ids) detail::put<std::uint32_t>(out, d);
      const auto& s = block.summary;
      detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
      for (TokenId id : s.ids()) detail::put<std::uint32_t>(out, id);
      for (double w : s.weights()) detail::put<float>(out, round_up_to_float(w));
    }
  }
}

void write_index(const InvertedIndex& ix, const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  write_index(ix, out);
  detail::finish_out(out, path);
}

InvertedIndex read_index(std::istream& in,
                         std::shared_ptr<const Collection> forward) {
  detail::expect_magic(in, kMagic);
  detail::expect_version(in, kVersion);
  BuildConfig cfg;
  cfg.max_postings = detail::get<std::uint32_t>(in, "lambda");
  cfg.alpha = detail::get<float>(in, "alpha");
  cfg.centroid_fraction = detail::get<float>(in, "centroid fraction");
  cfg.seed = detail::get<std::uint64_t>(in, "seed");
  try {
    cfg.validate();
  } catch (const ValidationError& e) {
    throw FormatError(FormatError::Kind::kBadHeader, e.what());
  }

  const std::uint32_t vocab = forward->vocab_size();
  const std::size_t n_docs = forward->size();
  std::vector<PostingList> lists;
  std::vector<DocId> seen;
  while (in.peek() != std::char_traits<char>::eof()) {
    PostingList list;
    list.token = detail::get<std::uint32_t>(in, "token id");
    if (list.token >= vocab) {
      throw FormatError(FormatError::Kind::kIdOutOfRange,
                        "posting list token " + std::to_string(list.token) +
                            " outside vocabulary");
    }
    if (!lists.empty() && list.token <= lists.back().token) {
      throw FormatError(FormatError::Kind::kOrdering,
                        "posting lists not in ascending token order");
    }
    const std::string where = "list " + std::to_string(list.token);
    const auto n_blocks = detail::get<std::uint32_t>(in, where);
    if (n_blocks == 0) {
      throw FormatError(FormatError::Kind::kBadValue, where + ": no blocks");
    }
    seen.clear();
    for (std::uint32_t b = 0; b < n_blocks; ++b) {
      Block block;
      const auto n = detail::get<std::uint32_t>(in, where);
      if (n == 0 || n > n_docs) {
        throw FormatError(FormatError::Kind::kBadValue,
                          where + ": bad block size");
      }
      block.doc_ids.resize(n);
      for (auto& d : block.doc_ids) {
        d = detail::get<std::uint32_t>(in, where);
        if (d >= n_docs) {
          throw FormatError(FormatError::Kind::kIdOutOfRange,
                            where + ": doc id " + std::to_string(d) +
                                " not in forward collection");
        }
      }
      seen.insert(seen.end(), block.doc_ids.begin(), block.doc_ids.end());
      block.summary = detail::get_sparse(in, vocab, where + " summary");
      list.blocks.push_back(std::move(block));
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
      throw FormatError(FormatError::Kind::kDuplicate,
                        where + ": document listed twice");
    }
    lists.push_back(std::move(list));
  }
  return InvertedIndex(std::move(forward), cfg, std::move(lists));
}

InvertedIndex read_index(const std::filesystem::path& path,
                         std::shared_ptr<const Collection> forward) {
  auto in = detail::open_in(path);
  return read_index(in, std::move(forward));
}

}  // namespace lisr
