#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>
#include <set>
#include <tuple>

#include "docalign/alignment.hpp"
#include "docalign/vecmath.hpp"
#include "oracles.hpp"

using namespace docalign;

namespace {

EmbeddingMatrix unit_rows(std::mt19937_64& rng, std::size_t n,
                          std::uint32_t dim) {
  EmbeddingMatrix m;
  m.dim = dim;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = oracles::random_unit(rng, dim);
    m.data.insert(m.data.end(), row.begin(), row.end());
  }
  return m;
}

EmbeddingMatrix noisy_copy(std::mt19937_64& rng, const EmbeddingMatrix& src,
                           double sigma) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  EmbeddingMatrix out;
  out.dim = src.dim;
  out.data.resize(src.data.size());
  for (std::size_t i = 0; i < src.rows(); ++i) {
    for (std::uint32_t d = 0; d < src.dim; ++d)
      out.row(i)[d] = float(double(src.row(i)[d]) + sigma * gauss(rng));
    unit_normalize_inplace(std::span<float>(out.row(i), out.dim));
  }
  return out;
}

void check_coverage(const Alignment& a, std::size_t n, std::size_t m) {
  std::set<std::uint32_t> src_seen, tgt_seen;
  std::int64_t last_src = -1, last_tgt = -1;
  for (const AlignmentLink& link : a.links) {
    if (link.kind == LinkKind::MATCH || link.kind == LinkKind::DEL) {
      CHECK(src_seen.insert(link.src_idx).second);
      CHECK(std::int64_t(link.src_idx) > last_src);
      last_src = link.src_idx;
    }
    if (link.kind == LinkKind::MATCH || link.kind == LinkKind::INS) {
      CHECK(tgt_seen.insert(link.tgt_idx).second);
      CHECK(std::int64_t(link.tgt_idx) > last_tgt);
      last_tgt = link.tgt_idx;
    }
  }
  CHECK(src_seen.size() == n);
  CHECK(tgt_seen.size() == m);
  CHECK(a.links.size() >= std::max(n, m));
}

double link_f1(const Alignment& a, const Alignment& b) {
  auto key = [](const AlignmentLink& l) {
    return std::tuple<int, std::uint32_t, std::uint32_t>(int(l.kind),
                                                         l.src_idx, l.tgt_idx);
  };
  std::set<std::tuple<int, std::uint32_t, std::uint32_t>> sa, sb;
  for (const auto& l : a.links) sa.insert(key(l));
  for (const auto& l : b.links) sb.insert(key(l));
  std::size_t inter = 0;
  for (const auto& k : sa) inter += sb.count(k);
  if (sa.empty() && sb.empty()) return 1.0;
  return 2.0 * double(inter) / double(sa.size() + sb.size());
}

// Match costs via the shared cosine primitive; the enumeration itself is
// the independent part (the DP search is what is being verified).
std::vector<std::vector<double>> match_costs(const EmbeddingMatrix& src,
                                             const EmbeddingMatrix& tgt) {
  std::vector<std::vector<double>> mc(src.rows(),
                                      std::vector<double>(tgt.rows()));
  for (std::size_t i = 0; i < src.rows(); ++i)
    for (std::size_t j = 0; j < tgt.rows(); ++j) {
      double ns = l2_norm(std::span<const float>(src.row(i), src.dim));
      double nt = l2_norm(std::span<const float>(tgt.row(j), tgt.dim));
      double dp = dot(std::span<const float>(src.row(i), src.dim),
                      std::span<const float>(tgt.row(j), tgt.dim));
      mc[i][j] =
          (ns <= 1e-12 || nt <= 1e-12) ? 1.0 : 1.0 - dp / (ns * nt);
    }
  return mc;
}

}  // namespace

TEST_CASE("identical sequences align as all matches at zero cost") {
  std::mt19937_64 rng(1);
  EmbeddingMatrix src = unit_rows(rng, 5, 8);
  Alignment a = align_exact(src, src, {});
  REQUIRE(a.links.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(a.links[i].kind == LinkKind::MATCH);
    CHECK(a.links[i].src_idx == i);
    CHECK(a.links[i].tgt_idx == i);
  }
  CHECK(a.cost == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("an orthogonal extra sentence becomes an insertion") {
  std::mt19937_64 rng(2);
  EmbeddingMatrix src;
  src.dim = 8;
  src.data.assign(4 * 8, 0.0f);
  for (std::size_t i = 0; i < 4; ++i) src.row(i)[i] = 1.0f;

  EmbeddingMatrix tgt;
  tgt.dim = 8;
  tgt.data.assign(5 * 8, 0.0f);
  tgt.row(0)[0] = 1.0f;
  tgt.row(1)[1] = 1.0f;
  tgt.row(2)[7] = 1.0f;  // inserted, orthogonal to everything in src
  tgt.row(3)[2] = 1.0f;
  tgt.row(4)[3] = 1.0f;

  Alignment a = align_exact(src, tgt, {});
  REQUIRE(a.links.size() == 5);
  CHECK(a.links[0].kind == LinkKind::MATCH);
  CHECK(a.links[1].kind == LinkKind::MATCH);
  CHECK(a.links[2].kind == LinkKind::INS);
  CHECK(a.links[2].tgt_idx == 2);
  CHECK(a.links[3].kind == LinkKind::MATCH);
  CHECK(a.links[4].kind == LinkKind::MATCH);
  CHECK(a.cost == doctest::Approx(0.5));

  // enumeration oracle confirms optimality
  double best = oracles::enumerate_min_alignment_cost(match_costs(src, tgt), 4,
                                                      5, 0.5);
  CHECK(a.cost == doctest::Approx(best));
  (void)rng;
}

TEST_CASE("empty sides become pure skip chains") {
  EmbeddingMatrix empty;
  empty.dim = 8;
  std::mt19937_64 rng(3);
  EmbeddingMatrix tgt = unit_rows(rng, 3, 8);
  Alignment a = align_exact(empty, tgt, {});
  REQUIRE(a.links.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(a.links[j].kind == LinkKind::INS);
    CHECK(a.links[j].tgt_idx == j);
  }
  CHECK(a.cost == doctest::Approx(3 * 0.5));

  Alignment b = align_exact(tgt, empty, {});
  REQUIRE(b.links.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(b.links[i].kind == LinkKind::DEL);

  Alignment c = align_exact(empty, empty, {});
  CHECK(c.links.empty());
  CHECK(c.cost == doctest::Approx(0.0));
}

TEST_CASE("backtrace ties prefer a match over skip pairs") {
  EmbeddingMatrix src, tgt;
  src.dim = tgt.dim = 2;
  src.data = {1.0f, 0.0f};
  tgt.data = {0.0f, 1.0f};  // cosine 0: match costs 1 == two skips
  Alignment a = align_exact(src, tgt, {});
  REQUIRE(a.links.size() == 1);
  CHECK(a.links[0].kind == LinkKind::MATCH);
}

TEST_CASE("exact DP matches exhaustive enumeration on small inputs") {
  std::mt19937_64 rng(42);
  for (std::size_t n = 0; n <= 4; ++n) {
    for (std::size_t m = 0; m <= 4; ++m) {
      for (int rep = 0; rep < 10; ++rep) {
        EmbeddingMatrix src = unit_rows(rng, n, 6);
        EmbeddingMatrix tgt = unit_rows(rng, m, 6);
        Alignment a = align_exact(src, tgt, {});
        double best = oracles::enumerate_min_alignment_cost(
            match_costs(src, tgt), n, m, 0.5);
        CHECK(a.cost == best);  // exact equality
        check_coverage(a, n, m);
      }
    }
  }
}

TEST_CASE("downsample halves the rows") {
  std::mt19937_64 rng(9);
  EmbeddingMatrix m = unit_rows(rng, 4, 8);
  EmbeddingMatrix d = downsample(m);
  CHECK(d.rows() == 2);

  // identical consecutive rows average to themselves after normalization
  EmbeddingMatrix twin;
  twin.dim = 8;
  auto row = oracles::random_unit(rng, 8);
  twin.data.insert(twin.data.end(), row.begin(), row.end());
  twin.data.insert(twin.data.end(), row.begin(), row.end());
  EmbeddingMatrix dt = downsample(twin);
  REQUIRE(dt.rows() == 1);
  for (std::uint32_t i = 0; i < 8; ++i)
    CHECK(dt.row(0)[i] == doctest::Approx(row[i]).epsilon(1e-6));

  // odd trailing row passes through normalized
  EmbeddingMatrix odd = unit_rows(rng, 5, 8);
  EmbeddingMatrix od = downsample(odd);
  REQUIRE(od.rows() == 3);
  for (std::uint32_t i = 0; i < 8; ++i)
    CHECK(od.row(2)[i] == doctest::Approx(odd.row(4)[i]).epsilon(1e-6));
}

TEST_CASE("small inputs delegate to the exact aligner bitwise") {
  std::mt19937_64 rng(10);
  for (int rep = 0; rep < 10; ++rep) {
    EmbeddingMatrix src = unit_rows(rng, 3 + rep % 8, 8);
    EmbeddingMatrix tgt = noisy_copy(rng, src, 0.2);
    Alignment fast = align_coarse_to_fine(src, tgt, {});
    Alignment exact = align_exact(src, tgt, {});
    CHECK(fast.links == exact.links);
    CHECK(fast.cost == exact.cost);
  }
}

TEST_CASE("coarse-to-fine recovers the exact alignment on noisy copies") {
  std::mt19937_64 rng(11);
  int good = 0;
  for (int rep = 0; rep < 20; ++rep) {
    EmbeddingMatrix src = unit_rows(rng, 40, 16);
    EmbeddingMatrix tgt = noisy_copy(rng, src, 0.1);
    Alignment fast = align_coarse_to_fine(src, tgt, {});
    Alignment exact = align_exact(src, tgt, {});
    check_coverage(fast, 40, 40);
    if (link_f1(fast, exact) >= 0.98) ++good;
  }
  CHECK(good >= 19);
}

TEST_CASE("a shifted pair recovers its inserted prefix") {
  std::mt19937_64 rng(12);
  EmbeddingMatrix src = unit_rows(rng, 30, 16);
  EmbeddingMatrix prefix = unit_rows(rng, 3, 16);
  EmbeddingMatrix tgt;
  tgt.dim = 16;
  tgt.data = prefix.data;
  tgt.data.insert(tgt.data.end(), src.data.begin(), src.data.end());

  Alignment fast = align_coarse_to_fine(src, tgt, {});
  Alignment exact = align_exact(src, tgt, {});
  CHECK(link_f1(fast, exact) >= 0.98);
  REQUIRE(fast.links.size() >= 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(fast.links[j].kind == LinkKind::INS);
    CHECK(fast.links[j].tgt_idx == j);
  }
}

TEST_CASE("coarse-to-fine output always satisfies coverage invariants") {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 10; ++rep) {
    std::size_t n = 1 + std::size_t(rng() % 70);
    std::size_t m = 1 + std::size_t(rng() % 70);
    EmbeddingMatrix src = unit_rows(rng, n, 8);
    EmbeddingMatrix tgt = unit_rows(rng, m, 8);
    Alignment a = align_coarse_to_fine(src, tgt, {});
    check_coverage(a, n, m);
  }
}

TEST_CASE("runtime grows roughly linearly with input size") {
  std::mt19937_64 rng(14);
  auto time_align = [&](std::size_t n) {
    EmbeddingMatrix src = unit_rows(rng, n, 16);
    EmbeddingMatrix tgt = noisy_copy(rng, src, 0.1);
    align_coarse_to_fine(src, tgt, {});  // warm-up
    auto start = std::chrono::steady_clock::now();
    for (int rep = 0; rep < 10; ++rep) align_coarse_to_fine(src, tgt, {});
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  };
  double t500 = time_align(500);
  double t1000 = time_align(1000);
  double t2000 = time_align(2000);
  CHECK(t1000 < 2.5 * t500);
  CHECK(t2000 < 2.5 * t1000);
}

TEST_CASE("alignment configuration is validated") {
  EmbeddingMatrix m;
  m.dim = 4;
  AlignConfig bad;
  bad.skip_cost = 0.0;
  CHECK_THROWS_AS(align_exact(m, m, bad), InputError);
  AlignConfig bad2;
  bad2.radius = 0;
  CHECK_THROWS_AS(align_coarse_to_fine(m, m, bad2), InputError);
  AlignConfig bad3;
  bad3.min_size = 1;
  CHECK_THROWS_AS(align_coarse_to_fine(m, m, bad3), InputError);
}
