#ifndef DOCALIGN_EVALUATION_HPP
#define DOCALIGN_EVALUATION_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "docalign/types.hpp"

namespace docalign {

// Character-level (Unicode code point) Levenshtein distance, unit costs.
std::size_t levenshtein(std::string_view a, std::string_view b);

// True iff levenshtein(a,b) < 0.05 * max(codepoints(a), codepoints(b)).
// Two empty strings are near-duplicates.
bool near_duplicate(std::string_view a, std::string_view b);

struct GoldPairs {
  std::set<std::pair<std::string, std::string>> pairs;
  // doc_id -> full document text (sentences joined by newline)
  std::map<std::string, std::string> texts;
};

struct RecallResult {
  std::size_t gold = 0;
  std::size_t credited = 0;
  double recall = 0.0;
};

// A gold pair (e*, f*) is credited iff some predicted (e, f) has e = e*
// and f equal to or a near-duplicate of f*, or f = f* and e a
// near-duplicate of e*. Each gold pair is credited at most once.
// Texts must cover every id involved in a near-duplicate check.
RecallResult soft_recall(
    const std::set<std::pair<std::string, std::string>>& pred,
    const GoldPairs& gold);

}  // namespace docalign

#endif  // DOCALIGN_EVALUATION_HPP
