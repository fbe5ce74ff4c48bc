#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "docalign/corpus_io.hpp"
#include "docalign/vecmath.hpp"
#include "test_util.hpp"

using namespace docalign;
using testutil::TempDir;
using testutil::write_file;

TEST_CASE("load_corpus parses documents in file order") {
  TempDir dir;
  write_file(dir.file("c.jsonl"),
             R"({"doc_id":"a","webdomain":"x.org","lang":"en","sentences":["Hi."]})"
             "\n");
  auto docs = load_corpus(dir.file("c.jsonl"));
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].doc_id == "a");
  CHECK(docs[0].webdomain == "x.org");
  CHECK(docs[0].lang == "en");
  REQUIRE(docs[0].size() == 1);
  CHECK(docs[0].sentences[0] == "Hi.");
}

TEST_CASE("load_corpus accepts an empty file") {
  TempDir dir;
  write_file(dir.file("c.jsonl"), "");
  CHECK(load_corpus(dir.file("c.jsonl")).empty());
}

TEST_CASE("load_corpus rejects duplicate doc ids") {
  TempDir dir;
  write_file(dir.file("c.jsonl"),
             R"({"doc_id":"a","webdomain":"x","lang":"en","sentences":[]})"
             "\n"
             R"({"doc_id":"a","webdomain":"x","lang":"fr","sentences":[]})"
             "\n");
  CHECK_THROWS_WITH_AS(load_corpus(dir.file("c.jsonl")),
                       doctest::Contains("duplicate doc_id"), InputError);
}

TEST_CASE("load_corpus reports the offending line number") {
  TempDir dir;
  write_file(dir.file("c.jsonl"),
             R"({"doc_id":"a","webdomain":"x","lang":"en","sentences":[]})"
             "\nnot json\n");
  CHECK_THROWS_WITH_AS(load_corpus(dir.file("c.jsonl")),
                       doctest::Contains(":2:"), InputError);
}

TEST_CASE("load_corpus allows empty sentence lists") {
  TempDir dir;
  write_file(dir.file("c.jsonl"),
             R"({"doc_id":"a","webdomain":"x","lang":"en","sentences":[]})"
             "\n");
  auto docs = load_corpus(dir.file("c.jsonl"));
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].size() == 0);
}

TEST_CASE("embeddings store/load round trip is bit-exact") {
  TempDir dir;
  std::map<std::string, EmbeddingMatrix> data;
  std::mt19937_64 rng(1234);
  for (int d = 0; d < 5; ++d) {
    EmbeddingMatrix m;
    m.dim = 7;
    std::size_t rows = std::size_t(d);
    m.data.resize(rows * m.dim);
    for (float& v : m.data) {
      // arbitrary finite bit patterns, including denormals
      std::uint32_t bits;
      do {
        bits = std::uint32_t(rng());
        std::memcpy(&v, &bits, 4);
      } while (!std::isfinite(v));
    }
    data["doc_" + std::to_string(d)] = std::move(m);
  }
  store_embeddings(data, dir.file("e.emb"));
  auto loaded = load_embeddings(dir.file("e.emb"));
  REQUIRE(loaded.size() == data.size());
  for (const auto& [id, m] : data) {
    const EmbeddingMatrix& l = loaded.at(id);
    CHECK(l.dim == m.dim);
    REQUIRE(l.data.size() == m.data.size());
    CHECK(std::memcmp(l.data.data(), m.data.data(),
                      m.data.size() * sizeof(float)) == 0);
  }
}

TEST_CASE("load_embeddings checks expected sentence counts") {
  TempDir dir;
  EmbeddingMatrix m;
  m.dim = 4;
  m.data.resize(2 * 4, 0.5f);
  store_embeddings({{"a", m}}, dir.file("e.emb"));

  std::map<std::string, std::size_t> expected{{"a", 1}};
  CHECK_THROWS_WITH_AS(load_embeddings(dir.file("e.emb"), &expected),
                       doctest::Contains("\"a\""), InputError);

  expected["a"] = 2;
  auto ok = load_embeddings(dir.file("e.emb"), &expected);
  CHECK(ok.at("a").rows() == 2);

  std::map<std::string, std::size_t> missing{{"a", 2}, {"b", 1}};
  CHECK_THROWS_WITH_AS(load_embeddings(dir.file("e.emb"), &missing),
                       doctest::Contains("\"b\""), InputError);
}

TEST_CASE("load_embeddings rejects non-finite values") {
  TempDir dir;
  EmbeddingMatrix m;
  m.dim = 2;
  m.data = {1.0f, std::numeric_limits<float>::quiet_NaN()};
  store_embeddings({{"a", m}}, dir.file("e.emb"));
  CHECK_THROWS_AS(load_embeddings(dir.file("e.emb")), InputError);
}

TEST_CASE("store_embeddings rejects mixed dims and writes empty files") {
  TempDir dir;
  EmbeddingMatrix a, b;
  a.dim = 2;
  b.dim = 3;
  CHECK_THROWS_WITH_AS(store_embeddings({{"a", a}, {"b", b}}, dir.file("e")),
                       doctest::Contains("mixed dims"), InputError);

  store_embeddings({}, dir.file("empty.emb"));
  CHECK(load_embeddings(dir.file("empty.emb")).empty());

  CHECK_THROWS_AS(store_embeddings({}, dir.file("no/such/dir/e.emb")),
                  InputError);
}

TEST_CASE("load_lid parses records and validates ranges") {
  TempDir dir;
  write_file(dir.file("lid.jsonl"),
             R"({"doc_id":"a","probs":[{"en":0.99,"fr":0.01}]})"
             "\n");
  auto lids = load_lid(dir.file("lid.jsonl"));
  REQUIRE(lids.count("a") == 1);
  const LidRecord& rec = lids.at("a");
  REQUIRE(rec.probs.size() == 1);
  CHECK(lid_prob(&rec, 0, "en") == doctest::Approx(0.99));
  // missing language key falls back to the configured default
  CHECK(lid_prob(&rec, 0, "de") == doctest::Approx(1.0));
  CHECK(lid_prob(&rec, 0, "de", 0.25) == doctest::Approx(0.25));

  write_file(dir.file("bad.jsonl"),
             R"({"doc_id":"a","probs":[{"en":1.5}]})"
             "\n");
  CHECK_THROWS_AS(load_lid(dir.file("bad.jsonl")), InputError);
}

TEST_CASE("load_lid checks sentence counts against the corpus") {
  TempDir dir;
  write_file(dir.file("lid.jsonl"),
             R"({"doc_id":"a","probs":[{"en":0.9},{"en":0.8}]})"
             "\n");
  std::map<std::string, std::size_t> expected{{"a", 3}};
  CHECK_THROWS_WITH_AS(load_lid(dir.file("lid.jsonl"), &expected),
                       doctest::Contains("count mismatch"), InputError);
}

TEST_CASE("unit_normalize") {
  std::vector<float> v{3.0f, 4.0f};
  auto u = unit_normalize(v);
  CHECK(u[0] == doctest::Approx(0.6).epsilon(1e-7));
  CHECK(u[1] == doctest::Approx(0.8).epsilon(1e-7));

  std::vector<float> zero{0.0f, 0.0f, 0.0f};
  auto z = unit_normalize(zero);
  CHECK(z == zero);

  std::vector<float> unit{1.0f, 0.0f};
  auto w = unit_normalize(unit);
  CHECK(std::fabs(w[0] - 1.0f) <= 1e-12);
  CHECK(std::fabs(w[1]) <= 1e-12);
}

TEST_CASE("pca model file round trip") {
  TempDir dir;
  PcaModel model;
  model.input_dim = 3;
  model.output_dim = 2;
  model.mean = {0.25f, -1.5f, 3.0f};
  model.components = {1.0f, 0.0f, 0.0f, 0.0f, 1.0f, 0.0f};
  store_pca_model(model, dir.file("m.pca"));
  PcaModel loaded = load_pca_model(dir.file("m.pca"));
  CHECK(loaded.input_dim == model.input_dim);
  CHECK(loaded.output_dim == model.output_dim);
  CHECK(loaded.mean == model.mean);
  CHECK(loaded.components == model.components);
}
