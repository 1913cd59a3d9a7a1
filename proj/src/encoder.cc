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

#include "lisr/encoder.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "binary_io.h"

namespace lisr {

namespace {

constexpr std::string_view kEmbeddingMagic = "LSRE";
constexpr std::uint32_t kEmbeddingVersion = 1;

template <typename T>
double score_impl(std::span<const double> w, double b, std::span<const T> e) {
  if (w.size() != e.size()) {
    throw ValidationError("dimension mismatch: w has " +
                          std::to_string(w.size()) + ", embedding has " +
                          std::to_string(e.size()));
  }
  double z = b;
  for (std::size_t i = 0; i < w.size(); ++i) z += w[i] * static_cast<double>(e[i]);
  return std::log1p(std::max(0.0, z));
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

FormatError line_error(FormatError::Kind kind, std::size_t line,
                       const std::string& what) {
  return FormatError(kind, "line " + std::to_string(line) + ": " + what);
}

// Parses "key=<uint>" out of a header line.
std::size_t header_field(const std::string& header, std::string_view key) {
  const std::string needle = std::string(key) + "=";
  const auto pos = header.find(needle);
  if (pos == std::string::npos) {
    throw FormatError(FormatError::Kind::kBadHeader,
                      "header lacks " + std::string(key));
  }
  std::size_t value = 0;
  const char* begin = header.data() + pos + needle.size();
  auto [ptr, ec] = std::from_chars(begin, header.data() + header.size(), value);
  if (ec != std::errc() || ptr == begin) {
    throw FormatError(FormatError::Kind::kBadHeader,
                      "bad " + std::string(key) + " in header");
  }
  return value;
}

// Reads "<id>\t<value>" lines into a dense array of `size` entries.
std::vector<double> read_id_value_lines(std::istream& in, std::size_t size,
                                        std::string_view what) {
  std::vector<double> values(size, 0.0);
  std::vector<std::uint8_t> seen(size, 0);
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw line_error(FormatError::Kind::kBadValue, line_no,
                       "expected token_id<TAB>" + std::string(what));
    }
    std::size_t id = 0;
    auto r1 = std::from_chars(line.data(), line.data() + tab, id);
    if (r1.ec != std::errc() || r1.ptr != line.data() + tab) {
      throw line_error(FormatError::Kind::kBadValue, line_no, "bad token id");
    }
    double v = 0.0;
    auto r2 = std::from_chars(line.data() + tab + 1, line.data() + line.size(), v);
    if (r2.ec != std::errc() || r2.ptr != line.data() + line.size()) {
      throw line_error(FormatError::Kind::kBadValue, line_no,
                       "bad " + std::string(what));
    }
    if (id >= size) {
      throw line_error(FormatError::Kind::kIdOutOfRange, line_no,
                       "token id " + std::to_string(id) +
                           " beyond vocabulary of " + std::to_string(size));
    }
    if (seen[id]) {
      throw line_error(FormatError::Kind::kDuplicate, line_no,
                       "token id " + std::to_string(id) + " listed twice");
    }
    if (!std::isfinite(v) || v < 0.0) {
      throw line_error(FormatError::Kind::kBadValue, line_no,
                       std::string(what) + " must be finite and >= 0");
    }
    seen[id] = 1;
    values[id] = v;
  }
  return values;
}

std::string read_header(std::istream& in, std::string_view prefix) {
  std::string header;
  if (!std::getline(in, header) || header.rfind(prefix, 0) != 0) {
    throw FormatError(FormatError::Kind::kBadHeader,
                      "expected header starting with '" + std::string(prefix) +
                          "'");
  }
  return header;
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim,
                                 std::vector<float> data)
    : rows_(rows), dim_(dim), data_(std::move(data)) {
  if (data_.size() != rows_ * dim_) {
    throw ValidationError("embedding data size does not match rows x dim");
  }
  for (float v : data_) {
    if (!std::isfinite(v)) throw ValidationError("non-finite embedding entry");
  }
}

void write_embeddings(const EmbeddingMatrix& e,
                      const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  detail::put_magic(out, kEmbeddingMagic);
  detail::put<std::uint32_t>(out, kEmbeddingVersion);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(e.rows()));
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(e.dim()));
  for (float v : e.data()) detail::put<float>(out, v);
  detail::finish_out(out, path);
}

EmbeddingMatrix read_embeddings(std::istream& in) {
  detail::expect_magic(in, kEmbeddingMagic);
  detail::expect_version(in, kEmbeddingVersion);
  const auto rows = detail::get<std::uint32_t>(in, "row count");
  const auto dim = detail::get<std::uint32_t>(in, "dimension");
  std::vector<float> data(static_cast<std::size_t>(rows) * dim);
  if (!data.empty() &&
      !in.read(reinterpret_cast<char*>(data.data()),
               static_cast<std::streamsize>(data.size() * sizeof(float)))) {
    throw FormatError(FormatError::Kind::kTruncated, "truncated embedding data");
  }
  for (float v : data) {
    if (!std::isfinite(v)) {
      throw FormatError(FormatError::Kind::kBadValue, "non-finite embedding entry");
    }
  }
  return EmbeddingMatrix(rows, dim, std::move(data));
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  return read_embeddings(in);
}

void ScoreTable::validate() const {
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i]) || scores[i] < 0.0) {
      throw ValidationError("score for token " + std::to_string(i) +
                            " is negative or non-finite");
    }
  }
}

double score_from_embedding(std::span<const double> w, double b,
                            std::span<const float> e) {
  return score_impl(w, b, e);
}

double score_from_embedding(std::span<const double> w, double b,
                            std::span<const double> e) {
  return score_impl(w, b, e);
}

ScoreTable build_table(std::span<const double> w, double b,
                       const EmbeddingMatrix& e,
                       std::span<const TokenId> zeroed) {
  ScoreTable t;
  t.scores.resize(e.rows());
  for (std::size_t i = 0; i < e.rows(); ++i) {
    t.scores[i] = score_from_embedding(w, b, e.row(static_cast<TokenId>(i)));
  }
  for (TokenId id : zeroed) {
    if (id < t.scores.size()) t.scores[id] = 0.0;
  }
  return t;
}

SparseVector encode_query(const TokenSequence& tokens, const ScoreTable& table) {
  std::map<TokenId, std::size_t> counts;
  for (TokenId id : tokens) {
    if (id >= table.size()) {
      throw ValidationError("token id " + std::to_string(id) +
                            " outside score table");
    }
    ++counts[id];
  }
  std::vector<TokenId> ids;
  std::vector<double> weights;
  for (const auto& [id, count] : counts) {
    const double s = table.scores[id];
    if (s <= 0.0) continue;
    ids.push_back(id);
    weights.push_back(static_cast<double>(count) * s);
  }
  if (ids.empty()) throw EmptyQueryError();
  return SparseVector::from_sorted(std::move(ids), std::move(weights));
}

IdfTable compute_idf(const Collection& c) {
  std::vector<std::size_t> df(c.vocab_size(), 0);
  for (const auto& d : c) {
    for (TokenId t : d.ids()) ++df[t];
  }
  IdfTable out;
  out.n_docs = c.size();
  out.idf.resize(c.vocab_size());
  const double n = static_cast<double>(c.size());
  for (std::size_t t = 0; t < df.size(); ++t) {
    const double f = static_cast<double>(df[t]);
    out.idf[t] = std::max(0.0, std::log(1.0 + (n - f + 0.5) / (f + 0.5)));
  }
  return out;
}

ScoreTable combine_idf(const ScoreTable& table, const IdfTable& idf) {
  if (table.size() != idf.idf.size()) {
    throw ValidationError("score table has " + std::to_string(table.size()) +
                          " entries, idf table " +
                          std::to_string(idf.idf.size()));
  }
  ScoreTable out;
  out.scores.resize(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    out.scores[i] = table.scores[i] * idf.idf[i];
  }
  out.validate();
  return out;
}

void write_table(const ScoreTable& t, std::ostream& out) {
  out << "#LSRT v1 vocab=" << t.size() << '\n';
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << i << '\t' << format_double(t.scores[i]) << '\n';
  }
}

void write_table(const ScoreTable& t, const std::filesystem::path& path) {
  auto out = detail::open_out(path, false);
  write_table(t, out);
  detail::finish_out(out, path);
}

ScoreTable read_table(std::istream& in, std::size_t expected_vocab) {
  const auto header = read_header(in, "#LSRT v1");
  const std::size_t vocab = header_field(header, "vocab");
  if (expected_vocab != 0 && vocab != expected_vocab) {
    throw FormatError(FormatError::Kind::kIdOutOfRange,
                      "table vocabulary " + std::to_string(vocab) +
                          " does not match " + std::to_string(expected_vocab));
  }
  ScoreTable t;
  t.scores = read_id_value_lines(in, vocab, "score");
  return t;
}

ScoreTable read_table(const std::filesystem::path& path,
                      std::size_t expected_vocab) {
  auto in = detail::open_in(path, false);
  return read_table(in, expected_vocab);
}

void write_idf(const IdfTable& t, const std::filesystem::path& path) {
  auto out = detail::open_out(path, false);
  out << "#LSRF v1 vocab=" << t.idf.size() << " docs=" << t.n_docs << '\n';
  for (std::size_t i = 0; i < t.idf.size(); ++i) {
    out << i << '\t' << format_double(t.idf[i]) << '\n';
  }
  detail::finish_out(out, path);
}

IdfTable read_idf(const std::filesystem::path& path) {
  auto in = detail::open_in(path, false);
  const auto header = read_header(in, "#LSRF v1");
  IdfTable t;
  const std::size_t vocab = header_field(header, "vocab");
  t.n_docs = header_field(header, "docs");
  t.idf = read_id_value_lines(in, vocab, "idf");
  return t;
}

}  // namespace lisr
