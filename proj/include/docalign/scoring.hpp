#ifndef DOCALIGN_SCORING_HPP
#define DOCALIGN_SCORING_HPP

#include <map>
#include <string>
#include <vector>

#include "docalign/alignment.hpp"
#include "docalign/types.hpp"

namespace docalign {

// Candidate document pair with both the stage-1 cosine and the
// alignment-based re-score.
struct ScoredPair {
  std::string src_id;
  std::string tgt_id;
  float cosine = 0.0f;
  double score = 0.0;  // alignment-based re-score in [-1, 1]
};

// Alignment-based document pair score: the mean over all links of
// cos(e,f) * p(L_src|e) * p(L_tgt|f) for matches and 0 for indels, so
// unaligned sentences dilute the score. Empty alignments score 0.
// LID records may be null; missing probabilities fall back to
// `default_prob`.
double score_pair(const Alignment& alignment, const EmbeddingMatrix& src_emb,
                  const EmbeddingMatrix& tgt_emb, const LidRecord* lid_src,
                  const LidRecord* lid_tgt, const std::string& src_lang,
                  const std::string& tgt_lang, double default_prob = 1.0);

// Sorts by (score desc, src_id asc, tgt_id asc) and greedily accepts pairs
// whose documents are both still unused. Output is in acceptance order.
std::vector<ScoredPair> greedy_match(std::vector<ScoredPair> scored);

struct SentencePair {
  double score = 0.0;
  std::string src_id;
  std::uint32_t src_idx = 0;
  std::string tgt_id;
  std::uint32_t tgt_idx = 0;
};

// Emits one entry per MATCH link of every matched pair, scored by
// cos(e,f) * p(L_src|e) * p(L_tgt|f), sorted by score descending.
// Filtering by a threshold is left to the consumer.
std::vector<SentencePair> extract_sentence_pairs(
    const std::vector<ScoredPair>& matches,
    const std::map<std::pair<std::string, std::string>, Alignment>& alignments,
    const std::map<std::string, EmbeddingMatrix>& embeddings,
    const std::map<std::string, LidRecord>& lids, const std::string& src_lang,
    const std::string& tgt_lang, double default_prob = 1.0);

}  // namespace docalign

#endif  // DOCALIGN_SCORING_HPP
