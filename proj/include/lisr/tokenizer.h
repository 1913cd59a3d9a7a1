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
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lisr/sparse_vector.h"

namespace lisr {

using TokenSequence = std::vector<TokenId>;

/*! WordPiece vocabulary, one token per line (line number = token id).
 *
 * [UNK] must be present; [CLS], [SEP] and [PAD] are optional.
 */
class TokenizerVocab {
 public:
  explicit TokenizerVocab(std::vector<std::string> tokens);

  static TokenizerVocab load(const std::filesystem::path& path);
  static TokenizerVocab load(std::istream& in);

  std::optional<TokenId> find(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_[id]; }
  std::size_t size() const { return tokens_.size(); }

  TokenId unk_id() const { return unk_id_; }
  //! Ids of [UNK], [CLS], [SEP], [PAD] that exist in this vocabulary.
  std::vector<TokenId> special_ids() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
  TokenId unk_id_ = 0;
};

inline constexpr std::size_t kMaxCharsPerWord = 100;

//! NFC + lowercase, split on whitespace and punctuation (punctuation kept as
//! single-character words), then greedy longest-match WordPiece with "##"
//! continuations. Words that cannot be fully matched become [UNK]. No
//! sequence markers are added.
TokenSequence tokenize(std::string_view text, const TokenizerVocab& vocab);

//! The normalization and pre-split stage alone, in UTF-8.
std::vector<std::string> basic_split(std::string_view text);

}  // namespace lisr
