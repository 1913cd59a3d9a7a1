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
#include <span>
#include <utility>
#include <vector>

namespace lisr {

using TokenId = std::uint32_t;
using DocId = std::uint32_t;

/*! Sparse vector over a vocabulary.
 *
 * Token ids are strictly increasing and every stored weight is finite and
 * strictly positive. Weights are kept in double precision in memory; files
 * store them as 32-bit floats.
 */
class SparseVector {
 public:
  SparseVector() = default;

  //! Builds from arbitrary (token, weight) pairs. Pairs are sorted by token,
  //! non-positive weights are dropped. Throws ValidationError on duplicate
  //! tokens or non-finite weights.
  static SparseVector from_pairs(std::vector<std::pair<TokenId, double>> pairs);

  //! Builds from already canonical parallel arrays. Throws ValidationError if
  //! ids are not strictly increasing or any weight is non-positive/non-finite.
  static SparseVector from_sorted(std::vector<TokenId> ids,
                                  std::vector<double> weights);

  std::span<const TokenId> ids() const { return ids_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  //! Weight at `token`, 0 when absent.
  double weight_of(TokenId token) const;

  //! Largest token id + 1, 0 for the empty vector.
  TokenId dimension_bound() const { return ids_.empty() ? 0 : ids_.back() + 1; }

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  SparseVector(std::vector<TokenId> ids, std::vector<double> weights)
      : ids_(std::move(ids)), weights_(std::move(weights)) {}

  std::vector<TokenId> ids_;
  std::vector<double> weights_;
};

//! Sum of products over shared token ids, accumulated in token-id order.
double dot(const SparseVector& a, const SparseVector& b);

//! Dot product of `v` against a densified query. Products are accumulated in
//! token-id order, so for any two vectors where one dominates the other
//! coordinate-wise the results are ordered the same way.
inline double dot_dense(std::span<const double> dense, const SparseVector& v) {
  double sum = 0.0;
  const auto ids = v.ids();
  const auto ws = v.weights();
  for (std::size_t i = 0; i < ids.size(); ++i) sum += dense[ids[i]] * ws[i];
  return sum;
}

double l1_norm(const SparseVector& a);

}  // namespace lisr
