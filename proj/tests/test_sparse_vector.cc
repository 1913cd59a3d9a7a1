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

#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "lisr/collection.h"
#include "lisr/error.h"
#include "oracles.h"

using namespace lisr;

namespace {

SparseVector sv(std::vector<std::pair<TokenId, double>> p) {
  return SparseVector::from_pairs(std::move(p));
}

// Hand-rolled little-endian writer, independent of the library's encoder.
struct Bytes {
  std::string data;
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) data.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f32(float f) {
    std::uint32_t v;
    std::memcpy(&v, &f, 4);
    u32(v);
  }
  void raw(const std::string& s) { data += s; }
};

Bytes header(std::uint32_t vocab, std::uint32_t n_docs) {
  Bytes b;
  b.raw("LSRC");
  b.u32(1);
  b.u32(vocab);
  b.u32(n_docs);
  return b;
}

FormatError::Kind read_error_kind(const std::string& data) {
  std::istringstream in(data);
  try {
    (void)read_collection(in);
  } catch (const FormatError& e) {
    return e.kind();
  }
  FAIL("expected a FormatError");
  return FormatError::Kind::kIo;
}

}  // namespace

TEST_CASE("dot of vectors sharing one coordinate") {
  CHECK(dot(sv({{1, 2.0}, {5, 3.0}}), sv({{5, 4.0}, {9, 1.0}})) == 12.0);
}

TEST_CASE("dot of disjoint supports is zero") {
  CHECK(dot(sv({{1, 2.0}}), sv({{2, 7.0}})) == 0.0);
}

TEST_CASE("dot matches the dense oracle on random pairs") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> nnz(1, 50);
  for (int i = 0; i < 20; ++i) {
    const auto a = oracle::random_vector(rng, 50, nnz(rng));
    const auto b = oracle::random_vector(rng, 50, nnz(rng));
    CHECK(dot(a, b) == doctest::Approx(oracle::dense_dot(a, b, 50)).epsilon(1e-12));
  }
}

TEST_CASE("dot is symmetric and self-dot is the sum of squares") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    const auto a = oracle::random_vector(rng, 300, 1 + rng() % 80);
    const auto b = oracle::random_vector(rng, 300, 1 + rng() % 80);
    CHECK(dot(a, b) == dot(b, a));
    double squares = 0.0;
    for (double w : a.weights()) squares += w * w;
    CHECK(dot(a, a) >= 0.0);
    CHECK(dot(a, a) == doctest::Approx(squares).epsilon(1e-12));
  }
}

TEST_CASE("l1 norm") {
  CHECK(l1_norm(sv({{1, 2.0}, {5, 3.0}})) == 5.0);
  CHECK(l1_norm(sv({{0, 1.0}})) == 1.0);
  std::mt19937_64 rng(13);
  for (int i = 0; i < 20; ++i) {
    const auto a = oracle::random_vector(rng, 100, 40);
    const auto d = oracle::densify(a, 100);
    double s = 0.0;
    for (double x : d) s += std::abs(x);
    CHECK(std::abs(l1_norm(a) - s) <= 1e-9);
  }
}

TEST_CASE("from_pairs canonicalizes and validates") {
  const auto v = sv({{9, 1.0}, {2, 0.0}, {4, -1.0}, {3, 2.0}});
  CHECK(std::vector<TokenId>(v.ids().begin(), v.ids().end()) == std::vector<TokenId>{3, 9});
  CHECK(v.weight_of(3) == 2.0);
  CHECK(v.weight_of(4) == 0.0);
  CHECK_THROWS_AS(sv({{1, 1.0}, {1, 2.0}}), ValidationError);
  CHECK_THROWS_AS(sv({{1, std::numeric_limits<double>::infinity()}}), ValidationError);
  CHECK_THROWS_AS(sv({{1, std::nan("")}}), ValidationError);
  CHECK_THROWS_AS(SparseVector::from_sorted({5, 3}, {1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(SparseVector::from_sorted({1}, {0.0}), ValidationError);
  CHECK_THROWS_AS(SparseVector::from_sorted({1, 2}, {1.0}), ValidationError);
}

TEST_CASE("collection rejects empty vectors and out-of-range ids") {
  Collection c(10);
  CHECK_THROWS_AS(c.add(SparseVector()), ValidationError);
  CHECK_THROWS_AS(c.add(sv({{10, 1.0}})), ValidationError);
  CHECK(c.add(sv({{9, 1.0}})) == 0);
}

TEST_CASE("footprint of a 384-nnz document is 1536 bytes") {
  std::vector<std::pair<TokenId, double>> p;
  for (TokenId t = 0; t < 384; ++t) p.emplace_back(t * 3, 1.0 + t);
  Collection c(30522);
  c.add(sv(p));
  const auto s = collection_stats(c);
  CHECK(s.total_nnz == 384);
  CHECK(s.footprint_bytes == 1536);
  CHECK_FALSE(s.vocab_exceeds_16bit);
}

TEST_CASE("stats of two documents") {
  Collection c(100);
  std::vector<std::pair<TokenId, double>> a, b;
  for (TokenId t = 0; t < 10; ++t) a.emplace_back(t, 1.0);
  for (TokenId t = 0; t < 30; ++t) b.emplace_back(t, 1.0);
  c.add(sv(a));
  c.add(sv(b));
  const auto s = collection_stats(c);
  CHECK(s.n_docs == 2);
  CHECK(s.avg_nnz == 20.0);
  CHECK(s.footprint_bytes == 160);
}

TEST_CASE("footprint is four bytes per entry on a random collection") {
  std::mt19937_64 rng(14);
  const auto c = oracle::random_collection(rng, 100, 500, 80);
  std::size_t count = 0;
  for (const auto& d : c) count += d.size();
  const auto s = collection_stats(c);
  CHECK(s.total_nnz == count);
  CHECK(s.footprint_bytes == 4 * count);
  CHECK(collection_stats(Collection(1u << 16)).vocab_exceeds_16bit);
}

TEST_CASE("collection round-trip is byte-identical") {
  Collection c(20);
  c.add(sv({{1, 0.5}, {7, 2.25}}));
  c.add(sv({{0, 1.0}}));
  c.add(sv({{3, 3.0}, {4, 4.0}, {19, 0.125}}));
  std::ostringstream first;
  write_collection(c, first);
  std::istringstream in(first.str());
  const auto back = read_collection(in);
  std::ostringstream second;
  write_collection(back, second);
  CHECK(first.str() == second.str());
  CHECK(back.vocab_size() == 20);
  REQUIRE(back.size() == 3);
  for (DocId d = 0; d < 3; ++d) CHECK(back[d] == c[d]);
}

TEST_CASE("collection file layout matches the documented format") {
  Collection c(8);
  c.add(sv({{2, 1.5}, {5, 0.25}}));
  std::ostringstream out;
  write_collection(c, out);
  auto b = header(8, 1);
  b.u32(2);
  b.u32(2);
  b.u32(5);
  b.f32(1.5f);
  b.f32(0.25f);
  CHECK(out.str() == b.data);
}

TEST_CASE("1000 random documents round-trip through a file") {
  std::mt19937_64 rng(15);
  const auto c = oracle::random_collection(rng, 1000, 2000, 60);
  oracle::TempDir dir("sv");
  write_collection(c, dir / "c.lsrc");
  const auto back = read_collection(dir / "c.lsrc");
  REQUIRE(back.size() == c.size());
  for (DocId d = 0; d < c.size(); ++d) CHECK(back[d] == c[d]);
}

TEST_CASE("malformed collection files raise distinct errors") {
  using K = FormatError::Kind;
  SUBCASE("bad magic") {
    Bytes b;
    b.raw("LSRX");
    b.u32(1);
    b.u32(8);
    b.u32(0);
    CHECK(read_error_kind(b.data) == K::kBadHeader);
  }
  SUBCASE("bad version") {
    Bytes b;
    b.raw("LSRC");
    b.u32(2);
    b.u32(8);
    b.u32(0);
    CHECK(read_error_kind(b.data) == K::kBadHeader);
  }
  SUBCASE("truncated payload") {
    auto b = header(8, 1);
    b.u32(2);
    b.u32(1);
    CHECK(read_error_kind(b.data) == K::kTruncated);
  }
  SUBCASE("non-increasing token ids") {
    auto b = header(8, 1);
    b.u32(2);
    b.u32(5);
    b.u32(3);
    b.f32(1.0f);
    b.f32(1.0f);
    CHECK(read_error_kind(b.data) == K::kOrdering);
  }
  SUBCASE("token id beyond the vocabulary") {
    auto b = header(8, 1);
    b.u32(1);
    b.u32(8);
    b.f32(1.0f);
    CHECK(read_error_kind(b.data) == K::kIdOutOfRange);
  }
  SUBCASE("non-positive weight") {
    auto b = header(8, 1);
    b.u32(1);
    b.u32(1);
    b.f32(0.0f);
    CHECK(read_error_kind(b.data) == K::kBadValue);
  }
  SUBCASE("empty document") {
    auto b = header(8, 1);
    b.u32(0);
    CHECK(read_error_kind(b.data) == K::kBadValue);
  }
  SUBCASE("trailing bytes") {
    auto b = header(8, 0);
    b.u32(7);
    CHECK(read_error_kind(b.data) == K::kBadHeader);
  }
  SUBCASE("missing file") {
    try {
      (void)read_collection(std::filesystem::path("/nonexistent/lisr.lsrc"));
      FAIL("expected an error");
    } catch (const FormatError& e) {
      CHECK(e.kind() == K::kIo);
    }
  }
}
