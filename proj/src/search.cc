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

#include "lisr/search.h"

#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>
#include <ostream>

#include "lisr/error.h"

namespace lisr {

namespace {

bool better(const Hit& a, const Hit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc < b.doc;
}

// Bounded heap whose front is the worst retained hit.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k + 1); }

  bool full() const { return heap_.size() == k_; }
  double threshold() const {
    return full() ? heap_.front().score
                  : -std::numeric_limits<double>::infinity();
  }

  void offer(Hit h) {
    if (heap_.size() < k_) {
      heap_.push_back(h);
      std::push_heap(heap_.begin(), heap_.end(), better);
    } else if (better(h, heap_.front())) {
      std::pop_heap(heap_.begin(), heap_.end(), better);
      heap_.back() = h;
      std::push_heap(heap_.begin(), heap_.end(), better);
    }
  }

  TopKResult take() {
    std::sort(heap_.begin(), heap_.end(), better);
    return TopKResult{std::move(heap_)};
  }

 private:
  std::size_t k_;
  std::vector<Hit> heap_;
};

constexpr std::size_t kPrefetchAhead = 4;

void prefetch_vector(const SparseVector& v) {
  __builtin_prefetch(v.ids().data());
  __builtin_prefetch(v.weights().data());
}

}  // namespace

void SearchParams::validate() const {
  if (k < 1) throw ValidationError("k must be >= 1");
  if (!(heap_factor > 0.0 && heap_factor <= 1.0)) {
    throw ValidationError("heap factor must be in (0, 1]");
  }
}

Searcher::Searcher(const Collection& c)
    : collection_(&c),
      dense_query_(c.vocab_size(), 0.0),
      query_mask_((static_cast<std::size_t>(c.vocab_size()) + 63) / 64, 0),
      visited_(c.size(), 0) {}

void Searcher::load_query(const SparseVector& q) {
  const auto ids = q.ids();
  const auto ws = q.weights();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < dense_query_.size()) {
      dense_query_[ids[i]] = ws[i];
      query_mask_[ids[i] / 64] |= std::uint64_t{1} << (ids[i] % 64);
    }
  }
}

void Searcher::unload_query(const SparseVector& q) {
  for (TokenId t : q.ids()) {
    if (t < dense_query_.size()) {
      dense_query_[t] = 0.0;
      query_mask_[t / 64] = 0;
    }
  }
}

double Searcher::masked_dot(const SparseVector& v) const {
  double sum = 0.0;
  const auto ids = v.ids();
  const auto ws = v.weights();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const TokenId t = ids[i];
    if ((query_mask_[t / 64] >> (t % 64)) & 1) sum += dense_query_[t] * ws[i];
  }
  return sum;
}

TopKResult Searcher::exhaustive(const SparseVector& q, std::size_t k) {
  if (k < 1) throw ValidationError("k must be >= 1");
  load_query(q);
  TopK top(k);
  const auto& docs = collection_->docs();
  for (DocId d = 0; d < docs.size(); ++d) {
    top.offer({d, dot_dense(dense_query_, docs[d])});
  }
  unload_query(q);
  return top.take();
}

TopKResult Searcher::approximate(const SparseVector& q, const InvertedIndex& ix,
                                 const SearchParams& p) {
  p.validate();
  if (&ix.forward() != collection_) {
    throw ValidationError("searcher and index use different collections");
  }
  if (++epoch_ == 0) {
    std::fill(visited_.begin(), visited_.end(), 0);
    epoch_ = 1;
  }
  load_query(q);

  // Query tokens by weight descending, ties to the lower token id.
  std::vector<std::size_t> order(q.size());
  std::iota(order.begin(), order.end(), 0);
  const auto qw = q.weights();
  const auto qi = q.ids();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (qw[a] != qw[b]) return qw[a] > qw[b];
    return qi[a] < qi[b];
  });
  if (p.query_cut != 0 && order.size() > p.query_cut) order.resize(p.query_cut);

  const auto& docs = collection_->docs();
  TopK top(p.k);
  std::vector<std::pair<double, std::size_t>> bounds;
  for (std::size_t qpos : order) {
    const PostingList* list = ix.find(qi[qpos]);
    if (list == nullptr) continue;
    const auto& blocks = list->blocks;
    bounds.clear();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (b + kPrefetchAhead < blocks.size()) {
        prefetch_vector(blocks[b + kPrefetchAhead].summary);
      }
      bounds.emplace_back(masked_dot(blocks[b].summary), b);
    }
    // Few blocks are opened per list, so pop bounds off a heap instead of
    // sorting them all.
    const auto after = [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return a.second > b.second;
    };
    std::make_heap(bounds.begin(), bounds.end(), after);
    for (auto end = bounds.end(); end != bounds.begin(); --end) {
      std::pop_heap(bounds.begin(), end, after);
      const auto [ub, b] = *(end - 1);
      // Bounds are visited in decreasing order and the threshold only rises,
      // so the first skipped block ends this list.
      if (top.full() && ub < p.heap_factor * top.threshold()) break;
      const auto& ids = blocks[b].doc_ids;
      // Block members are scattered over the forward index; request them
      // all before scoring so the cache misses overlap.
      for (DocId d : ids) __builtin_prefetch(&docs[d]);
      for (DocId d : ids) {
        if (visited_[d] != epoch_) prefetch_vector(docs[d]);
      }
      for (DocId d : ids) {
        if (visited_[d] == epoch_) continue;
        visited_[d] = epoch_;
        top.offer({d, dot_dense(dense_query_, docs[d])});
      }
    }
  }
  unload_query(q);
  return top.take();
}

TopKResult search_exhaustive(const SparseVector& q, const Collection& c,
                             std::size_t k) {
  Searcher s(c);
  return s.exhaustive(q, k);
}

TopKResult search_approximate(const SparseVector& q, const InvertedIndex& ix,
                              const SearchParams& p) {
  Searcher s(ix.forward());
  return s.approximate(q, ix, p);
}

double recall_vs_exact(std::span<const SparseVector> queries,
                       const Collection& c, const InvertedIndex& ix,
                       const SearchParams& p) {
  p.validate();
  if (queries.empty()) throw ValidationError("empty query set");
  Searcher s(c);
  double total = 0.0;
  for (const auto& q : queries) {
    const auto exact = s.exhaustive(q, p.k);
    const auto approx = s.approximate(q, ix, p);
    std::vector<DocId> a;
    std::vector<DocId> e;
    for (const auto& h : exact.hits) e.push_back(h.doc);
    for (const auto& h : approx.hits) a.push_back(h.doc);
    std::sort(a.begin(), a.end());
    std::sort(e.begin(), e.end());
    std::vector<DocId> common;
    std::set_intersection(a.begin(), a.end(), e.begin(), e.end(),
                          std::back_inserter(common));
    total += static_cast<double>(common.size()) / static_cast<double>(p.k);
  }
  return total / static_cast<double>(queries.size());
}

BenchResult bench_aqt(std::span<const SparseVector> queries, SearchMode mode,
                      const Collection& c, const InvertedIndex* ix,
                      const SearchParams& p) {
  if (queries.empty()) throw ValidationError("empty query set");
  p.validate();
  if (mode == SearchMode::kApproximate && ix == nullptr) {
    throw ValidationError("approximate mode needs an index");
  }
  Searcher s(c);
  auto run = [&](const SparseVector& q) {
    return mode == SearchMode::kExhaustive ? s.exhaustive(q, p.k)
                                           : s.approximate(q, *ix, p);
  };
  for (const auto& q : queries) (void)run(q);

  BenchResult r;
  r.per_query_us.reserve(queries.size());
  r.results.reserve(queries.size());
  double total = 0.0;
  for (const auto& q : queries) {
    const auto start = std::chrono::steady_clock::now();
    auto result = run(q);
    const auto stop = std::chrono::steady_clock::now();
    const double us =
        std::chrono::duration<double, std::micro>(stop - start).count();
    r.per_query_us.push_back(us);
    r.results.push_back(std::move(result));
    total += us;
  }
  r.aqt_us = total / static_cast<double>(queries.size());
  return r;
}

void write_bench_csv(std::span<const BenchRow> rows, std::ostream& out) {
  std::string metric;
  for (const auto& r : rows) {
    if (!r.metric.empty()) metric = r.metric;
  }
  out << "mode,lambda,alpha,centroid_fraction,query_cut,heap_factor,k,aqt_us,"
         "recall_at_k";
  if (!metric.empty()) out << ',' << metric;
  out << '\n';
  for (const auto& r : rows) {
    out << r.mode << ',' << r.lambda << ',' << r.alpha << ','
        << r.centroid_fraction << ',' << r.query_cut << ',' << r.heap_factor
        << ',' << r.k << ',' << r.aqt_us << ',' << r.recall_at_k;
    if (!metric.empty()) out << ',' << r.metric_value;
    out << '\n';
  }
}

}  // namespace lisr
