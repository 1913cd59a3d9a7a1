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

#include "lisr/sparse_vector.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "lisr/error.h"

namespace lisr {

SparseVector SparseVector::from_pairs(
    std::vector<std::pair<TokenId, double>> pairs) {
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<TokenId> ids;
  std::vector<double> weights;
  ids.reserve(pairs.size());
  weights.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [token, weight] = pairs[i];
    if (!std::isfinite(weight)) {
      throw ValidationError("non-finite weight for token " +
                            std::to_string(token));
    }
    if (i > 0 && pairs[i - 1].first == token) {
      throw ValidationError("duplicate token " + std::to_string(token));
    }
    if (weight <= 0.0) continue;
    ids.push_back(token);
    weights.push_back(weight);
  }
  return SparseVector(std::move(ids), std::move(weights));
}

SparseVector SparseVector::from_sorted(std::vector<TokenId> ids,
                                       std::vector<double> weights) {
  if (ids.size() != weights.size()) {
    throw ValidationError("ids and weights differ in length");
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0 && ids[i] <= ids[i - 1]) {
      throw ValidationError("token ids not strictly increasing at position " +
                            std::to_string(i));
    }
    if (!std::isfinite(weights[i]) || weights[i] <= 0.0) {
      throw ValidationError("weight at position " + std::to_string(i) +
                            " is not finite and positive");
    }
  }
  return SparseVector(std::move(ids), std::move(weights));
}

double SparseVector::weight_of(TokenId token) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), token);
  if (it == ids_.end() || *it != token) return 0.0;
  return weights_[static_cast<std::size_t>(it - ids_.begin())];
}

double dot(const SparseVector& a, const SparseVector& b) {
  const auto ai = a.ids();
  const auto bi = b.ids();
  const auto aw = a.weights();
  const auto bw = b.weights();
  double sum = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < ai.size() && j < bi.size()) {
    if (ai[i] == bi[j]) {
      sum += aw[i] * bw[j];
      ++i;
      ++j;
    } else if (ai[i] < bi[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return sum;
}

double l1_norm(const SparseVector& a) {
  double sum = 0.0;
  for (double w : a.weights()) sum += w;
  return sum;
}

}  // namespace lisr
