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

#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "lisr/error.h"
#include "lisr/tokenizer.h"

using namespace lisr;

namespace {

TokenizerVocab make_vocab(std::vector<std::string> extra) {
  std::vector<std::string> t{"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
  t.insert(t.end(), extra.begin(), extra.end());
  return TokenizerVocab(std::move(t));
}

TokenId id(const TokenizerVocab& v, const std::string& s) {
  const auto found = v.find(s);
  REQUIRE(found.has_value());
  return *found;
}

// Plain greedy longest-match over an ASCII word, written from the textbook
// description: take the longest vocabulary prefix, continue with "##" pieces,
// give up on the whole word when no piece matches.
TokenSequence greedy_oracle(const std::string& word, const std::vector<std::string>& vocab) {
  auto lookup = [&](const std::string& s) -> std::optional<TokenId> {
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      if (vocab[i] == s) return static_cast<TokenId>(i);
    }
    return std::nullopt;
  };
  TokenSequence out;
  std::size_t start = 0;
  while (start < word.size()) {
    std::optional<TokenId> hit;
    std::size_t end = word.size();
    for (; end > start; --end) {
      hit = lookup((start ? "##" : "") + word.substr(start, end - start));
      if (hit) break;
    }
    if (!hit) return {*lookup("[UNK]")};
    out.push_back(*hit);
    start = end;
  }
  return out;
}

}  // namespace

TEST_CASE("whole-word hit") {
  const auto v = make_vocab({"hello"});
  CHECK(tokenize("hello", v) == TokenSequence{id(v, "hello")});
}

TEST_CASE("unmatchable word becomes [UNK]") {
  const auto v = make_vocab({"hello"});
  CHECK(tokenize("zzz", v) == TokenSequence{v.unk_id()});
  CHECK(v.unk_id() == 1);
}

TEST_CASE("greedy longest match with continuation pieces") {
  const auto v = make_vocab({"play", "##ing", "pla", "##ying"});
  CHECK(tokenize("playing", v) == TokenSequence{id(v, "play"), id(v, "##ing")});
  const auto w = make_vocab({"play", "##ing"});
  CHECK(tokenize("playing", w) == TokenSequence{id(w, "play"), id(w, "##ing")});
}

TEST_CASE("a word that matches only partly becomes a single [UNK]") {
  const auto v = make_vocab({"play"});
  CHECK(tokenize("playing", v) == TokenSequence{v.unk_id()});
  CHECK(tokenize("play playing play", v) ==
        TokenSequence{id(v, "play"), v.unk_id(), id(v, "play")});
}

TEST_CASE("empty and whitespace-only text give an empty sequence") {
  const auto v = make_vocab({"a"});
  CHECK(tokenize("", v).empty());
  CHECK(tokenize(" \t\n ", v).empty());
}

TEST_CASE("punctuation splits words and is kept as tokens") {
  const auto v = make_vocab({"what", "?", "it", "'", "s", ",", "ok"});
  CHECK(tokenize("what?", v) == TokenSequence{id(v, "what"), id(v, "?")});
  CHECK(tokenize("it's,ok", v) == TokenSequence{id(v, "it"), id(v, "'"), id(v, "s"),
                                                id(v, ","), id(v, "ok")});
  CHECK(basic_split("a-b  c") == std::vector<std::string>{"a", "-", "b", "c"});
  // Unicode punctuation outside ASCII.
  CHECK(basic_split("x\xc2\xbfy") == std::vector<std::string>{"x", "\xc2\xbf", "y"});
}

TEST_CASE("text is lowercased and NFC-normalized with accents kept") {
  const auto v = make_vocab({"hello", "caf\xc3\xa9"});
  CHECK(tokenize("HeLLo", v) == TokenSequence{id(v, "hello")});
  // "cafe" + combining acute composes to the precomposed form.
  CHECK(tokenize("Cafe\xcc\x81", v) == TokenSequence{id(v, "caf\xc3\xa9")});
  CHECK(tokenize("CAF\xc3\x89", v) == TokenSequence{id(v, "caf\xc3\xa9")});
  CHECK(tokenize("cafe", v) == TokenSequence{v.unk_id()});
}

TEST_CASE("control and format characters are dropped") {
  CHECK(basic_split("ab\x01" "c\xe2\x80\x8b" "d") == std::vector<std::string>{"abcd"});
}

TEST_CASE("overlong words become [UNK] without matching") {
  const auto v = make_vocab({"a", "##a"});
  const std::string ok(100, 'a');
  const std::string too_long(101, 'a');
  const auto split = tokenize(ok, v);
  CHECK(split.size() == 100);
  CHECK(split.front() == id(v, "a"));
  CHECK(tokenize(too_long, v) == TokenSequence{v.unk_id()});
}

TEST_CASE("multi-byte characters are matched by code point") {
  const auto v = make_vocab({"\xc3\xbc", "##\xc3\xbc", "b"});
  CHECK(tokenize("\xc3\xbc\xc3\xbc", v) == TokenSequence{id(v, "\xc3\xbc"), id(v, "##\xc3\xbc")});
}

TEST_CASE("tokenize agrees with the greedy oracle on random words") {
  std::mt19937_64 rng(51);
  const std::string alphabet = "abcd";
  auto word = [&](std::size_t max_len) {
    std::string s;
    const std::size_t n = 1 + rng() % max_len;
    for (std::size_t i = 0; i < n; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
    return s;
  };
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> tokens{"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
    std::set<std::string> used(tokens.begin(), tokens.end());
    for (int i = 0; i < 25; ++i) {
      std::string t = (rng() % 2 ? "##" : "") + word(4);
      if (used.insert(t).second) tokens.push_back(t);
    }
    const TokenizerVocab v(tokens);
    for (int i = 0; i < 40; ++i) {
      const auto w = word(8);
      CHECK(tokenize(w, v) == greedy_oracle(w, tokens));
    }
  }
}

TEST_CASE("vocabulary loading") {
  std::istringstream in("[PAD]\n[UNK]\nfoo\r\n##bar\n");
  const auto v = TokenizerVocab::load(in);
  CHECK(v.size() == 4);
  CHECK(id(v, "foo") == 2);
  CHECK(id(v, "##bar") == 3);
  CHECK(v.token(2) == "foo");
  CHECK(v.special_ids() == std::vector<TokenId>{1, 0});
  std::istringstream dup("[UNK]\na\na\n");
  CHECK_THROWS_AS(TokenizerVocab::load(dup), FormatError);
  std::istringstream no_unk("a\nb\n");
  CHECK_THROWS_AS(TokenizerVocab::load(no_unk), FormatError);
  CHECK_THROWS_AS(TokenizerVocab::load(std::filesystem::path("/nonexistent/vocab.txt")),
                  FormatError);
}
