#include "docalign/evaluation.hpp"

#include <algorithm>

#include "docalign/utf8.hpp"

namespace docalign {

namespace {

std::size_t levenshtein_cps(const std::vector<std::uint32_t>& a,
                            const std::vector<std::uint32_t>& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n == 0) return m;
  if (m == 0) return n;
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

}  // namespace

std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein_cps(utf8_decode(a), utf8_decode(b));
}

bool near_duplicate(std::string_view a, std::string_view b) {
  std::vector<std::uint32_t> ca = utf8_decode(a);
  std::vector<std::uint32_t> cb = utf8_decode(b);
  std::size_t longest = std::max(ca.size(), cb.size());
  if (longest == 0) return true;
  double threshold = 0.05 * double(longest);
  // the distance is at least the length difference
  std::size_t diff = ca.size() > cb.size() ? ca.size() - cb.size()
                                           : cb.size() - ca.size();
  if (double(diff) >= threshold) return false;
  return double(levenshtein_cps(ca, cb)) < threshold;
}

RecallResult soft_recall(
    const std::set<std::pair<std::string, std::string>>& pred,
    const GoldPairs& gold) {
  auto text_of = [&](const std::string& id) -> const std::string& {
    auto it = gold.texts.find(id);
    if (it == gold.texts.end())
      throw InputError("soft_recall: missing text for doc \"" + id + "\"");
    return it->second;
  };

  RecallResult result;
  result.gold = gold.pairs.size();
  for (const auto& [gs, gt] : gold.pairs) {
    bool credited = false;
    for (const auto& [ps, pt] : pred) {
      if (ps == gs) {
        if (pt == gt || near_duplicate(text_of(pt), text_of(gt))) {
          credited = true;
          break;
        }
      } else if (pt == gt && near_duplicate(text_of(ps), text_of(gs))) {
        credited = true;
        break;
      }
    }
    if (credited) ++result.credited;
  }
  result.recall = result.gold == 0
                      ? 0.0
                      : double(result.credited) / double(result.gold);
  return result;
}

}  // namespace docalign
