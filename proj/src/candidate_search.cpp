#include "docalign/candidate_search.hpp"

#include <algorithm>
#include <cmath>

#include "docalign/vecmath.hpp"

namespace docalign {

SearchMode parse_search_mode(const std::string& name) {
  if (name == "exact") return SearchMode::EXACT;
  if (name == "approx") return SearchMode::APPROX;
  throw InputError("unknown search mode: " + name);
}

SearchIndex build_index(const std::map<std::string, DocVector>& vectors,
                        SearchMode mode, std::uint64_t seed) {
  (void)seed;  // the quantized scan is deterministic without randomness
  SearchIndex index;
  index.mode = mode;
  for (const auto& [id, v] : vectors) {
    if (index.ids.empty()) {
      index.dim = static_cast<std::uint32_t>(v.size());
    } else if (v.size() != index.dim) {
      throw InputError("build_index: vector length mismatch for \"" + id +
                       "\"");
    }
    index.ids.push_back(id);
    std::vector<float> row = unit_normalize(v.data);
    index.vectors.insert(index.vectors.end(), row.begin(), row.end());
  }
  if (mode == SearchMode::APPROX) {
    const std::size_t n = index.size();
    index.codes.resize(n * index.dim);
    index.scales.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const float* row = index.row(i);
      float amax = 0.0f;
      for (std::uint32_t d = 0; d < index.dim; ++d)
        amax = std::max(amax, std::fabs(row[d]));
      float scale = amax > 0.0f ? amax / 127.0f : 1.0f;
      index.scales[i] = scale;
      for (std::uint32_t d = 0; d < index.dim; ++d)
        index.codes[i * index.dim + d] =
            static_cast<std::int8_t>(std::lround(row[d] / scale));
    }
  }
  return index;
}

namespace {

// Top-k of (score, row) by score desc, breaking ties by doc_id ascending.
std::vector<std::pair<std::string, float>> take_top(
    const SearchIndex& index, std::vector<std::pair<double, std::size_t>>& hits,
    std::size_t k) {
  auto better = [&](const std::pair<double, std::size_t>& a,
                    const std::pair<double, std::size_t>& b) {
    if (a.first != b.first) return a.first > b.first;
    return index.ids[a.second] < index.ids[b.second];
  };
  k = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + std::ptrdiff_t(k), hits.end(),
                    better);
  std::vector<std::pair<std::string, float>> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i)
    out.emplace_back(index.ids[hits[i].second],
                     static_cast<float>(hits[i].first));
  return out;
}

}  // namespace

std::vector<std::pair<std::string, float>> knn_query(const SearchIndex& index,
                                                     const DocVector& query,
                                                     std::size_t k) {
  if (index.size() == 0 || k == 0) return {};
  if (query.size() != index.dim)
    throw InputError("knn_query: query length " +
                     std::to_string(query.size()) + " does not match index " +
                     std::to_string(index.dim));
  std::vector<float> q = unit_normalize(query.data);

  if (index.mode == SearchMode::EXACT) {
    std::vector<std::pair<double, std::size_t>> hits(index.size());
    for (std::size_t i = 0; i < index.size(); ++i)
      hits[i] = {dot(q, std::span<const float>(index.row(i), index.dim)), i};
    return take_top(index, hits, k);
  }

  // APPROX: int8 scan to shortlist, exact re-rank of the shortlist.
  const std::size_t shortlist = std::min(index.size(), std::max<std::size_t>(4 * k, 64));
  std::vector<std::int8_t> qcode(index.dim);
  float qmax = 0.0f;
  for (float x : q) qmax = std::max(qmax, std::fabs(x));
  float qscale = qmax > 0.0f ? qmax / 127.0f : 1.0f;
  for (std::uint32_t d = 0; d < index.dim; ++d)
    qcode[d] = static_cast<std::int8_t>(std::lround(q[d] / qscale));

  std::vector<std::pair<double, std::size_t>> coarse(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    const std::int8_t* code = index.codes.data() + i * index.dim;
    std::int64_t acc = 0;
    for (std::uint32_t d = 0; d < index.dim; ++d)
      acc += std::int32_t(code[d]) * std::int32_t(qcode[d]);
    coarse[i] = {double(acc) * index.scales[i] * qscale, i};
  }
  auto coarse_better = [&](const std::pair<double, std::size_t>& a,
                           const std::pair<double, std::size_t>& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  std::partial_sort(coarse.begin(), coarse.begin() + std::ptrdiff_t(shortlist),
                    coarse.end(), coarse_better);

  std::vector<std::pair<double, std::size_t>> hits(shortlist);
  for (std::size_t s = 0; s < shortlist; ++s) {
    std::size_t i = coarse[s].second;
    hits[s] = {dot(q, std::span<const float>(index.row(i), index.dim)), i};
  }
  return take_top(index, hits, k);
}

std::vector<CandidatePair> generate_candidates(
    const std::vector<Document>& docs,
    const std::map<std::string, DocVector>& docvecs,
    const std::string& src_lang, const std::string& tgt_lang, std::size_t k,
    SearchMode mode, std::uint64_t seed) {
  if (src_lang == tgt_lang)
    throw InputError("generate_candidates: src and tgt language are equal");

  // webdomain -> lang -> doc ids (sorted via std::map for determinism)
  std::map<std::string, std::map<std::string, std::vector<std::string>>> domains;
  for (const Document& d : docs) {
    if (d.size() == 0) continue;  // never a candidate
    if (d.lang != src_lang && d.lang != tgt_lang) continue;
    if (docvecs.find(d.doc_id) == docvecs.end())
      throw InputError("generate_candidates: missing document vector for \"" +
                       d.doc_id + "\"");
    domains[d.webdomain][d.lang].push_back(d.doc_id);
  }

  std::vector<CandidatePair> out;
  for (auto& [domain, sides] : domains) {
    (void)domain;
    std::vector<std::string>& a = sides[src_lang];
    std::vector<std::string>& b = sides[tgt_lang];
    if (a.empty() || b.empty()) continue;
    // the larger side queries the smaller; ties keep src_lang as source
    std::vector<std::string>& queries = b.size() > a.size() ? b : a;
    std::vector<std::string>& indexed = b.size() > a.size() ? a : b;
    std::sort(queries.begin(), queries.end());

    std::map<std::string, DocVector> side;
    for (const std::string& id : indexed) side[id] = docvecs.at(id);
    SearchIndex index = build_index(side, mode, seed);

    for (const std::string& qid : queries) {
      auto hits = knn_query(index, docvecs.at(qid), k);
      for (std::size_t r = 0; r < hits.size(); ++r)
        out.push_back(CandidatePair{qid, hits[r].first,
                                    static_cast<std::uint32_t>(r + 1),
                                    hits[r].second});
    }
  }
  return out;
}

std::map<std::size_t, double> recall_at_k(
    const std::vector<CandidatePair>& candidates,
    const std::set<std::pair<std::string, std::string>>& gold,
    const std::vector<std::size_t>& k_values) {
  // query id -> partner id -> best rank
  std::map<std::string, std::map<std::string, std::uint32_t>> ranks;
  for (const CandidatePair& c : candidates) {
    auto& m = ranks[c.src_id];
    auto it = m.find(c.tgt_id);
    if (it == m.end() || c.rank < it->second) m[c.tgt_id] = c.rank;
  }
  auto rank_of = [&](const std::string& a,
                     const std::string& b) -> std::uint32_t {
    auto it = ranks.find(a);
    if (it == ranks.end()) return 0;
    auto jt = it->second.find(b);
    return jt == it->second.end() ? 0 : jt->second;
  };

  std::map<std::size_t, double> out;
  for (std::size_t k : k_values) {
    std::size_t credited = 0;
    for (const auto& [s, t] : gold) {
      // candidate direction is per-domain; accept whichever side queried
      std::uint32_t r1 = rank_of(s, t);
      std::uint32_t r2 = rank_of(t, s);
      if ((r1 != 0 && r1 <= k) || (r2 != 0 && r2 <= k)) ++credited;
    }
    out[k] = gold.empty() ? 0.0 : double(credited) / double(gold.size());
  }
  return out;
}

std::vector<MarginPair> margin_score_pairs(const EmbeddingMatrix& src_vecs,
                                           const EmbeddingMatrix& tgt_vecs,
                                           std::size_t k) {
  if (k == 0) throw InputError("margin_score_pairs: k must be >= 1");
  const std::size_t n = src_vecs.rows();
  const std::size_t m = tgt_vecs.rows();
  if (n == 0 || m == 0) return {};
  if (src_vecs.dim != tgt_vecs.dim)
    throw InputError("margin_score_pairs: dimension mismatch");
  const std::uint32_t dim = src_vecs.dim;

  EmbeddingMatrix src = src_vecs;
  EmbeddingMatrix tgt = tgt_vecs;
  for (std::size_t i = 0; i < n; ++i)
    unit_normalize_inplace(std::span<float>(src.row(i), dim));
  for (std::size_t j = 0; j < m; ++j)
    unit_normalize_inplace(std::span<float>(tgt.row(j), dim));

  auto avg_topk = [&](std::vector<double>& scores, std::size_t kk) {
    kk = std::min(kk, scores.size());
    std::partial_sort(scores.begin(), scores.begin() + std::ptrdiff_t(kk),
                      scores.end(), std::greater<double>());
    double s = 0.0;
    for (std::size_t i = 0; i < kk; ++i) s += scores[i];
    return s / double(kk);
  };

  // per-row / per-column average similarity to the k nearest opposite-side
  // neighbors
  std::vector<double> cx(n), cy(m);
  std::vector<double> row(m);
  std::vector<std::vector<double>> coltop(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      row[j] = dot(std::span<const float>(src.row(i), dim),
                   std::span<const float>(tgt.row(j), dim));
      coltop[j].push_back(row[j]);
    }
    std::vector<double> tmp = row;
    cx[i] = avg_topk(tmp, k);
  }
  for (std::size_t j = 0; j < m; ++j) cy[j] = avg_topk(coltop[j], k);
  coltop.clear();

  // forward/backward best by margin, ties to the lower index
  std::vector<std::size_t> fwd(n);
  std::vector<double> fwd_margin(n);
  std::vector<std::size_t> bwd(m, std::size_t(-1));
  std::vector<double> bwd_margin(m, -HUGE_VAL);
  for (std::size_t i = 0; i < n; ++i) {
    double best = -HUGE_VAL;
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < m; ++j) {
      double c = dot(std::span<const float>(src.row(i), dim),
                     std::span<const float>(tgt.row(j), dim));
      double denom = (cx[i] + cy[j]) / 2.0;
      double margin = std::fabs(denom) > 1e-12 ? c / denom : 0.0;
      if (margin > best) {
        best = margin;
        best_j = j;
      }
      if (margin > bwd_margin[j]) {
        bwd_margin[j] = margin;
        bwd[j] = i;
      }
    }
    fwd[i] = best_j;
    fwd_margin[i] = best;
  }

  std::vector<MarginPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = fwd[i];
    if (bwd[j] == i)
      out.push_back(MarginPair{static_cast<std::uint32_t>(i),
                               static_cast<std::uint32_t>(j), fwd_margin[i]});
  }
  std::sort(out.begin(), out.end(), [](const MarginPair& a, const MarginPair& b) {
    if (a.margin != b.margin) return a.margin > b.margin;
    if (a.src_idx != b.src_idx) return a.src_idx < b.src_idx;
    return a.tgt_idx < b.tgt_idx;
  });
  return out;
}

}  // namespace docalign
