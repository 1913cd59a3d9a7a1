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

#include "lisr/fitter.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "lisr/error.h"

namespace lisr {

namespace {

// Per-query forward pass shared by scoring and differentiation.
struct QueryPass {
  std::vector<TokenId> ids;      // distinct tokens, ascending
  std::vector<double> counts;
  std::vector<double> scores;    // s = log(1 + relu(z))
  std::vector<double> dscore;    // ds/dz, 0 for z <= 0
};

QueryPass forward_query(const TokenSequence& tokens, std::span<const double> w,
                        double b, const EmbeddingMatrix& e) {
  if (w.size() != e.dim()) {
    throw ValidationError("parameter dimension " + std::to_string(w.size()) +
                          " != embedding dimension " + std::to_string(e.dim()));
  }
  std::map<TokenId, std::size_t> counts;
  for (TokenId t : tokens) {
    if (t >= e.rows()) {
      throw ValidationError("token id " + std::to_string(t) +
                            " outside embedding matrix");
    }
    ++counts[t];
  }
  QueryPass p;
  for (const auto& [t, c] : counts) {
    const auto row = e.row(t);
    double z = b;
    for (std::size_t i = 0; i < w.size(); ++i) z += w[i] * static_cast<double>(row[i]);
    p.ids.push_back(t);
    p.counts.push_back(static_cast<double>(c));
    if (z > 0.0) {
      p.scores.push_back(std::log1p(z));
      p.dscore.push_back(1.0 / (1.0 + z));
    } else {
      p.scores.push_back(0.0);
      p.dscore.push_back(0.0);
    }
  }
  return p;
}

SparseVector to_vector(const QueryPass& p) {
  std::vector<TokenId> ids;
  std::vector<double> ws;
  for (std::size_t i = 0; i < p.ids.size(); ++i) {
    const double v = p.counts[i] * p.scores[i];
    if (v <= 0.0) continue;
    ids.push_back(p.ids[i]);
    ws.push_back(v);
  }
  return SparseVector::from_sorted(std::move(ids), std::move(ws));
}

double score_against(const QueryPass& p, const SparseVector& doc) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.ids.size(); ++i) {
    const double q = p.counts[i] * p.scores[i];
    if (q > 0.0) s += q * doc.weight_of(p.ids[i]);
  }
  return s;
}

struct PairGrad {
  double value;
  double d_pos;
  double d_neg;
};

PairGrad rank_loss(RankLoss kind, double sp, double sn, double tp, double tn) {
  switch (kind) {
    case RankLoss::kKl: {
      const double tm = std::max(tp, tn);
      const double tz = std::log(std::exp(tp - tm) + std::exp(tn - tm)) + tm;
      const double sm = std::max(sp, sn);
      const double sz = std::log(std::exp(sp - sm) + std::exp(sn - sm)) + sm;
      const double lp_t = tp - tz;
      const double ln_t = tn - tz;
      const double lp_s = sp - sz;
      const double ln_s = sn - sz;
      const double pp = std::exp(lp_t);
      const double pn = std::exp(ln_t);
      const double value = pp * (lp_t - lp_s) + pn * (ln_t - ln_s);
      return {std::max(0.0, value), std::exp(lp_s) - pp, std::exp(ln_s) - pn};
    }
    case RankLoss::kMarginMse: {
      const double diff = (sp - sn) - (tp - tn);
      return {diff * diff, 2.0 * diff, -2.0 * diff};
    }
    case RankLoss::kPointwiseMse: {
      const double ep = sp - tp;
      const double en = sn - tn;
      return {0.5 * (ep * ep + en * en), ep, en};
    }
  }
  return {0.0, 0.0, 0.0};
}

double regularize(Regularizer reg, std::span<const SparseVector> batch) {
  return reg == Regularizer::kL1 ? reg_l1(batch) : reg_flops(batch);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::vector<const TrainTriple*> pointers(std::span<const TrainTriple> batch) {
  std::vector<const TrainTriple*> out;
  out.reserve(batch.size());
  for (const auto& t : batch) out.push_back(&t);
  return out;
}

}  // namespace

TokenSequence strip_tokens(const TokenSequence& tokens,
                           std::span<const TokenId> drop) {
  TokenSequence out;
  for (TokenId t : tokens) {
    if (std::find(drop.begin(), drop.end(), t) == drop.end()) out.push_back(t);
  }
  return out;
}

RankLoss parse_rank_loss(std::string_view name) {
  if (name == "kl") return RankLoss::kKl;
  if (name == "mse" || name == "margin-mse") return RankLoss::kMarginMse;
  if (name == "pointwise-mse") return RankLoss::kPointwiseMse;
  throw ValidationError("unknown loss '" + std::string(name) + "'");
}

Regularizer parse_regularizer(std::string_view name) {
  if (name == "l1") return Regularizer::kL1;
  if (name == "flops") return Regularizer::kFlops;
  throw ValidationError("unknown regularizer '" + std::string(name) + "'");
}

void FitConfig::validate() const {
  if (!(lambda_q >= 0.0) || !std::isfinite(lambda_q)) {
    throw ValidationError("lambda_q must be finite and >= 0");
  }
  if (!(lambda_d >= 0.0) || !std::isfinite(lambda_d)) {
    throw ValidationError("lambda_d must be finite and >= 0");
  }
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw ValidationError("learning rate must be finite and >= 0");
  }
  if (batch_size < 1) throw ValidationError("batch size must be >= 1");
}

FitState init_state(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ValidationError("embedding dimension must be >= 1");
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  std::uniform_real_distribution<double> u(-bound, bound);
  FitState s;
  s.w.resize(dim);
  for (auto& x : s.w) x = u(rng);
  return s;
}

SparseVector encode_query_from_params(const TokenSequence& tokens,
                                      std::span<const double> w, double b,
                                      const EmbeddingMatrix& e) {
  return to_vector(forward_query(tokens, w, b, e));
}

double student_score(const TokenSequence& tokens, std::span<const double> w,
                     double b, const EmbeddingMatrix& e,
                     const SparseVector& doc) {
  return score_against(forward_query(tokens, w, b, e), doc);
}

double loss_kl(double s_pos, double s_neg, double t_pos, double t_neg) {
  return rank_loss(RankLoss::kKl, s_pos, s_neg, t_pos, t_neg).value;
}

double loss_margin_mse(double s_pos, double s_neg, double t_pos, double t_neg) {
  return rank_loss(RankLoss::kMarginMse, s_pos, s_neg, t_pos, t_neg).value;
}

double loss_pointwise_mse(double s_pos, double s_neg, double t_pos,
                          double t_neg) {
  return rank_loss(RankLoss::kPointwiseMse, s_pos, s_neg, t_pos, t_neg).value;
}

double reg_l1(std::span<const SparseVector> batch) {
  if (batch.empty()) throw ValidationError("empty batch");
  double sum = 0.0;
  for (const auto& v : batch) sum += l1_norm(v);
  return sum / static_cast<double>(batch.size());
}

double reg_flops(std::span<const SparseVector> batch) {
  if (batch.empty()) throw ValidationError("empty batch");
  std::map<TokenId, double> totals;
  for (const auto& v : batch) {
    const auto ids = v.ids();
    const auto ws = v.weights();
    for (std::size_t i = 0; i < ids.size(); ++i) totals[ids[i]] += ws[i];
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  double sum = 0.0;
  for (const auto& [t, total] : totals) {
    const double mean = total * inv;
    sum += mean * mean;
  }
  return sum;
}

Objective evaluate_objective(std::span<const TrainTriple* const> batch,
                             std::span<const double> w, double b,
                             const FitConfig& cfg, const EmbeddingMatrix& e) {
  if (batch.empty()) throw ValidationError("empty batch");
  const std::size_t n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<QueryPass> passes;
  std::vector<SparseVector> queries;
  std::vector<SparseVector> docs;
  passes.reserve(n);
  queries.reserve(n);
  docs.reserve(2 * n);
  Objective obj;
  for (const auto* t : batch) {
    passes.push_back(forward_query(t->query_tokens, w, b, e));
    // An overflowing score makes the whole objective undefined; callers
    // treat the NaN as divergence.
    if (!all_finite(passes.back().scores)) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      obj.loss = {nan, nan, nan, nan};
      obj.grad_w.assign(w.size(), nan);
      obj.grad_b = nan;
      return obj;
    }
    queries.push_back(to_vector(passes.back()));
    docs.push_back(t->pos_doc);
    docs.push_back(t->neg_doc);
  }

  obj.grad_w.assign(w.size(), 0.0);

  // Batch means per token, needed by the FLOPS gradient.
  std::map<TokenId, double> means;
  if (cfg.reg == Regularizer::kFlops && cfg.lambda_q != 0.0) {
    for (const auto& q : queries) {
      const auto ids = q.ids();
      const auto ws = q.weights();
      for (std::size_t i = 0; i < ids.size(); ++i) means[ids[i]] += ws[i] * inv_n;
    }
  }

  double rank_sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const TrainTriple& t = *batch[j];
    const QueryPass& p = passes[j];
    const double sp = score_against(p, t.pos_doc);
    const double sn = score_against(p, t.neg_doc);
    const PairGrad g = rank_loss(cfg.loss, sp, sn, t.teacher_pos, t.teacher_neg);
    rank_sum += g.value;

    for (std::size_t i = 0; i < p.ids.size(); ++i) {
      if (p.dscore[i] == 0.0) continue;
      const TokenId x = p.ids[i];
      // dL/dq_x for this query.
      double dq = inv_n * (g.d_pos * t.pos_doc.weight_of(x) +
                           g.d_neg * t.neg_doc.weight_of(x));
      if (cfg.lambda_q != 0.0) {
        dq += cfg.lambda_q * (cfg.reg == Regularizer::kL1
                                  ? inv_n
                                  : 2.0 * means[x] * inv_n);
      }
      const double dz = dq * p.counts[i] * p.dscore[i];
      const auto row = e.row(x);
      for (std::size_t k = 0; k < w.size(); ++k) {
        obj.grad_w[k] += dz * static_cast<double>(row[k]);
      }
      obj.grad_b += dz;
    }
  }

  obj.loss.rank = rank_sum * inv_n;
  obj.loss.reg_q = regularize(cfg.reg, queries);
  obj.loss.reg_d = regularize(cfg.reg, docs);
  obj.loss.total = obj.loss.rank + cfg.lambda_q * obj.loss.reg_q +
                   cfg.lambda_d * obj.loss.reg_d;
  return obj;
}

Objective evaluate_objective(std::span<const TrainTriple> batch,
                             std::span<const double> w, double b,
                             const FitConfig& cfg, const EmbeddingMatrix& e) {
  const auto ptrs = pointers(batch);
  return evaluate_objective(std::span<const TrainTriple* const>(ptrs), w, b,
                            cfg, e);
}

FitState grad_step(const FitState& state,
                   std::span<const TrainTriple* const> batch,
                   const FitConfig& cfg, const EmbeddingMatrix& e) {
  cfg.validate();
  const Objective obj = evaluate_objective(batch, state.w, state.b, cfg, e);
  if (!std::isfinite(obj.loss.total)) {
    throw DivergenceError(state.step, "non-finite loss");
  }
  if (!all_finite(obj.grad_w) || !std::isfinite(obj.grad_b)) {
    throw DivergenceError(state.step, "non-finite gradient");
  }
  FitState next = state;
  for (std::size_t k = 0; k < next.w.size(); ++k) next.w[k] -= cfg.lr * obj.grad_w[k];
  next.b -= cfg.lr * obj.grad_b;
  if (!all_finite(next.w) || !std::isfinite(next.b)) {
    throw DivergenceError(state.step, "non-finite parameters");
  }
  next.step = state.step + 1;
  next.last = obj.loss;
  next.last_loss = obj.loss.total;
  return next;
}

FitState grad_step(const FitState& state, std::span<const TrainTriple> batch,
                   const FitConfig& cfg, const EmbeddingMatrix& e) {
  const auto ptrs = pointers(batch);
  return grad_step(state, std::span<const TrainTriple* const>(ptrs), cfg, e);
}

FitResult fit(std::span<const TrainTriple> triples, const EmbeddingMatrix& e,
              const FitConfig& cfg, std::span<const TokenId> zeroed) {
  cfg.validate();
  if (triples.empty()) throw ValidationError("no training triples");
  FitState state = init_state(e.dim(), cfg.seed);

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(triples.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;

  FitResult result;
  result.log.reserve(cfg.steps);
  std::vector<const TrainTriple*> batch;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    batch.clear();
    while (batch.size() < std::min(cfg.batch_size, triples.size())) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch.push_back(&triples[order[cursor++]]);
    }
    state = grad_step(state, std::span<const TrainTriple* const>(batch), cfg, e);
    result.log.push_back({step, state.last});
  }
  result.w = state.w;
  result.b = state.b;
  result.table = build_table(result.w, result.b, e, zeroed);
  // Finite parameters can still overflow a score.
  if (!all_finite(result.table.scores)) {
    throw DivergenceError(cfg.steps, "non-finite table score");
  }
  return result;
}

void write_training_log(std::span<const LogRow> log, std::ostream& out) {
  out << "step,rank_loss,reg_q,reg_d,total\n";
  out.precision(10);
  for (const auto& r : log) {
    out << r.step << ',' << r.loss.rank << ',' << r.loss.reg_q << ','
        << r.loss.reg_d << ',' << r.loss.total << '\n';
  }
}

}  // namespace lisr
