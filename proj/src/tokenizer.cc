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

#include "lisr/tokenizer.h"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <fstream>
#include <string>

#include "lisr/error.h"

namespace lisr {

namespace {

constexpr std::string_view kUnk = "[UNK]";
constexpr std::string_view kSpecials[] = {"[UNK]", "[CLS]", "[SEP]", "[PAD]"};

// BERT treats every non-alphanumeric ASCII symbol as punctuation, plus the
// Unicode P* categories.
bool is_punctuation(UChar32 c) {
  if ((c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
      (c >= 123 && c <= 126)) {
    return true;
  }
  return u_ispunct(c) != 0;
}

bool is_whitespace(UChar32 c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' ||
         u_isUWhiteSpace(c) != 0;
}

bool is_dropped(UChar32 c) {
  if (c == 0 || c == 0xFFFD) return true;
  const auto type = u_charType(c);
  return type == U_CONTROL_CHAR || type == U_FORMAT_CHAR;
}

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(buf, len, U8_MAX_LENGTH, c, error);
  if (!error) out.append(buf, static_cast<std::size_t>(len));
}

// Byte offsets of code point starts, plus the end offset.
std::vector<std::size_t> boundaries(const std::string& word) {
  std::vector<std::size_t> out;
  int32_t i = 0;
  const auto n = static_cast<int32_t>(word.size());
  while (i < n) {
    out.push_back(static_cast<std::size_t>(i));
    UChar32 c;
    U8_NEXT(word.data(), i, n, c);
    (void)c;
  }
  out.push_back(word.size());
  return out;
}

}  // namespace

TokenizerVocab::TokenizerVocab(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  ids_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw FormatError(FormatError::Kind::kDuplicate,
                        "duplicate vocabulary token '" + tokens_[i] +
                            "' at line " + std::to_string(i + 1));
    }
  }
  auto unk = find(kUnk);
  if (!unk) throw FormatError(FormatError::Kind::kBadValue, "vocabulary lacks [UNK]");
  unk_id_ = *unk;
}

TokenizerVocab TokenizerVocab::load(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return TokenizerVocab(std::move(tokens));
}

TokenizerVocab TokenizerVocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError(FormatError::Kind::kIo, "cannot open " + path.string());
  }
  return load(in);
}

std::optional<TokenId> TokenizerVocab::find(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::vector<TokenId> TokenizerVocab::special_ids() const {
  std::vector<TokenId> out;
  for (auto s : kSpecials) {
    if (auto id = find(s)) out.push_back(*id);
  }
  return out;
}

std::vector<std::string> basic_split(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC unavailable");
  icu::UnicodeString normalized = nfc->normalize(
      icu::UnicodeString::fromUTF8(
          icu::StringPiece(text.data(), static_cast<int32_t>(text.size()))),
      status);
  if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");
  normalized.toLower(icu::Locale::getRoot());

  std::vector<std::string> words;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) words.push_back(std::move(current));
    current.clear();
  };
  for (int32_t i = 0; i < normalized.length();) {
    const UChar32 c = normalized.char32At(i);
    i += U16_LENGTH(c);
    if (is_whitespace(c)) {
      flush();
    } else if (is_dropped(c)) {
      continue;
    } else if (is_punctuation(c)) {
      flush();
      append_utf8(current, c);
      flush();
    } else {
      append_utf8(current, c);
    }
  }
  flush();
  return words;
}

TokenSequence tokenize(std::string_view text, const TokenizerVocab& vocab) {
  TokenSequence out;
  std::string piece;
  for (const auto& word : basic_split(text)) {
    const auto cuts = boundaries(word);
    const std::size_t n_chars = cuts.size() - 1;
    if (n_chars > kMaxCharsPerWord) {
      out.push_back(vocab.unk_id());
      continue;
    }
    TokenSequence pieces;
    std::size_t start = 0;
    bool bad = false;
    while (start < n_chars) {
      std::size_t end = n_chars;
      std::optional<TokenId> match;
      while (end > start) {
        piece.clear();
        if (start > 0) piece = "##";
        piece.append(word, cuts[start], cuts[end] - cuts[start]);
        match = vocab.find(piece);
        if (match) break;
        --end;
      }
      if (!match) {
        bad = true;
        break;
      }
      pieces.push_back(*match);
      start = end;
    }
    if (bad) {
      out.push_back(vocab.unk_id());
    } else {
      out.insert(out.end(), pieces.begin(), pieces.end());
    }
  }
  return out;
}

}  // namespace lisr
