#ifndef DOCALIGN_CANDIDATE_SEARCH_HPP
#define DOCALIGN_CANDIDATE_SEARCH_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "docalign/docvec.hpp"
#include "docalign/types.hpp"

namespace docalign {

enum class SearchMode { EXACT, APPROX };

SearchMode parse_search_mode(const std::string& name);

// Cosine index over document vectors. EXACT scans exhaustively. APPROX
// runs an int8 scalar-quantized scan to shortlist candidates, then
// re-ranks the shortlist exactly; it is deterministic for a fixed seed.
struct SearchIndex {
  std::string webdomain;
  SearchMode mode = SearchMode::EXACT;
  std::uint32_t dim = 0;
  std::vector<std::string> ids;
  std::vector<float> vectors;  // row-major, rows unit-norm or zero

  // APPROX data: per-row int8 codes and reconstruction scales.
  std::vector<std::int8_t> codes;
  std::vector<float> scales;

  std::size_t size() const { return ids.size(); }
  const float* row(std::size_t i) const { return vectors.data() + i * dim; }
};

SearchIndex build_index(const std::map<std::string, DocVector>& vectors,
                        SearchMode mode, std::uint64_t seed = 0);

// Top-K entries by (cosine desc, doc_id asc). K larger than the index
// returns everything.
std::vector<std::pair<std::string, float>> knn_query(const SearchIndex& index,
                                                     const DocVector& query,
                                                     std::size_t k);

struct CandidatePair {
  std::string src_id;
  std::string tgt_id;
  std::uint32_t rank = 0;  // 1-based within src_id's list
  float cosine = 0.0f;
};

// Per webdomain, the language side with more documents queries the other
// side; ties go to src_lang. Candidates never cross webdomains. Empty
// documents must not appear in `docvecs`.
std::vector<CandidatePair> generate_candidates(
    const std::vector<Document>& docs,
    const std::map<std::string, DocVector>& docvecs,
    const std::string& src_lang, const std::string& tgt_lang,
    std::size_t k = 32, SearchMode mode = SearchMode::EXACT,
    std::uint64_t seed = 0);

// Exact-id recall@K. A gold pair is credited at K when its partner appears
// in the top-K candidate list of whichever side was the query side.
std::map<std::size_t, double> recall_at_k(
    const std::vector<CandidatePair>& candidates,
    const std::set<std::pair<std::string, std::string>>& gold,
    const std::vector<std::size_t>& k_values);

struct MarginPair {
  std::uint32_t src_idx = 0;
  std::uint32_t tgt_idx = 0;
  double margin = 0.0;
};

// Ratio-margin mining between two sentence embedding sets:
//   margin(x,y) = cos(x,y) / ((avgtopk(x, tgt) + avgtopk(y, src)) / 2)
// with neighborhoods drawn from the opposite side. Returns mutual-best
// pairs sorted by margin descending. Sides smaller than k use all
// available neighbors.
std::vector<MarginPair> margin_score_pairs(const EmbeddingMatrix& src_vecs,
                                           const EmbeddingMatrix& tgt_vecs,
                                           std::size_t k = 4);

}  // namespace docalign

#endif  // DOCALIGN_CANDIDATE_SEARCH_HPP
