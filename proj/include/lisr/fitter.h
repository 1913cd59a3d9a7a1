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
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "lisr/encoder.h"
#include "lisr/sparse_vector.h"
#include "lisr/tokenizer.h"

namespace lisr {

/*! One distillation example: a query, a positive and a negative document,
 * and the teacher's score for each document.
 *
 * `query_tokens` must not contain special tokens; the table built from the
 * fitted parameters scores those as 0, and strip_tokens() removes them.
 */
struct TrainTriple {
  TokenSequence query_tokens;
  SparseVector pos_doc;
  SparseVector neg_doc;
  double teacher_pos = 0.0;
  double teacher_neg = 0.0;
};

TokenSequence strip_tokens(const TokenSequence& tokens,
                           std::span<const TokenId> drop);

enum class RankLoss { kKl, kMarginMse, kPointwiseMse };
enum class Regularizer { kL1, kFlops };

RankLoss parse_rank_loss(std::string_view name);
Regularizer parse_regularizer(std::string_view name);

struct FitConfig {
  RankLoss loss = RankLoss::kKl;
  Regularizer reg = Regularizer::kL1;
  double lambda_q = 0.0;
  // Documents are frozen: the document regularizer is reported, never
  // differentiated.
  double lambda_d = 0.0;
  double lr = 1e-2;
  std::size_t steps = 1000;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LossComponents {
  double rank = 0.0;
  double reg_q = 0.0;
  double reg_d = 0.0;
  double total = 0.0;
};

struct FitState {
  std::vector<double> w;
  double b = 0.0;
  std::size_t step = 0;
  double last_loss = 0.0;
  LossComponents last;
};

//! w ~ U[-1/sqrt(d), 1/sqrt(d)] from `seed`, b = 0.
FitState init_state(std::size_t dim, std::uint64_t seed);

//! Query vector straight from the parameters: per distinct token,
//! count x log(1 + relu(w.E[x] + b)). Empty when every score is 0.
SparseVector encode_query_from_params(const TokenSequence& tokens,
                                      std::span<const double> w, double b,
                                      const EmbeddingMatrix& e);

double student_score(const TokenSequence& tokens, std::span<const double> w,
                     double b, const EmbeddingMatrix& e,
                     const SparseVector& doc);

//! KL(softmax(teacher) || softmax(student)) over the (pos, neg) pair.
double loss_kl(double s_pos, double s_neg, double t_pos, double t_neg);
//! ((s_pos - s_neg) - (t_pos - t_neg))^2
double loss_margin_mse(double s_pos, double s_neg, double t_pos, double t_neg);
//! Mean of the two squared score errors.
double loss_pointwise_mse(double s_pos, double s_neg, double t_pos,
                          double t_neg);

//! Mean L1 norm over the batch. Throws ValidationError on an empty batch.
double reg_l1(std::span<const SparseVector> batch);
//! Sum over coordinates of the squared batch-mean weight.
double reg_flops(std::span<const SparseVector> batch);

struct Objective {
  LossComponents loss;
  std::vector<double> grad_w;
  double grad_b = 0.0;
};

//! Full objective rank + lambda_q * reg(queries) + lambda_d * reg(docs) and
//! its analytic gradient in (w, b).
Objective evaluate_objective(std::span<const TrainTriple* const> batch,
                             std::span<const double> w, double b,
                             const FitConfig& cfg, const EmbeddingMatrix& e);
Objective evaluate_objective(std::span<const TrainTriple> batch,
                             std::span<const double> w, double b,
                             const FitConfig& cfg, const EmbeddingMatrix& e);

//! One gradient-descent step. Throws DivergenceError on a non-finite loss,
//! gradient or parameter.
FitState grad_step(const FitState& state,
                   std::span<const TrainTriple* const> batch,
                   const FitConfig& cfg, const EmbeddingMatrix& e);
FitState grad_step(const FitState& state, std::span<const TrainTriple> batch,
                   const FitConfig& cfg, const EmbeddingMatrix& e);

struct LogRow {
  std::size_t step = 0;
  LossComponents loss;
};

struct FitResult {
  std::vector<double> w;
  double b = 0.0;
  ScoreTable table;
  std::vector<LogRow> log;
};

//! Runs cfg.steps mini-batch steps, reshuffling the triples with cfg.seed at
//! every pass. `zeroed` tokens are forced to 0 in the returned table.
FitResult fit(std::span<const TrainTriple> triples, const EmbeddingMatrix& e,
              const FitConfig& cfg, std::span<const TokenId> zeroed = {});

//! CSV: step,rank_loss,reg_q,reg_d,total
void write_training_log(std::span<const LogRow> log, std::ostream& out);

}  // namespace lisr
