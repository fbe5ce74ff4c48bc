#include "docalign/scoring.hpp"

#include <algorithm>
#include <set>

#include "docalign/vecmath.hpp"

namespace docalign {

double score_pair(const Alignment& alignment, const EmbeddingMatrix& src_emb,
                  const EmbeddingMatrix& tgt_emb, const LidRecord* lid_src,
                  const LidRecord* lid_tgt, const std::string& src_lang,
                  const std::string& tgt_lang, double default_prob) {
  if (alignment.links.empty()) return 0.0;
  double sum = 0.0;
  for (const AlignmentLink& link : alignment.links) {
    if (link.kind != LinkKind::MATCH) continue;  // indels contribute 0
    double c = cosine(
        std::span<const float>(src_emb.row(link.src_idx), src_emb.dim),
        std::span<const float>(tgt_emb.row(link.tgt_idx), tgt_emb.dim));
    sum += c * lid_prob(lid_src, link.src_idx, src_lang, default_prob) *
           lid_prob(lid_tgt, link.tgt_idx, tgt_lang, default_prob);
  }
  return sum / double(alignment.links.size());
}

std::vector<ScoredPair> greedy_match(std::vector<ScoredPair> scored) {
  std::sort(scored.begin(), scored.end(),
            [](const ScoredPair& a, const ScoredPair& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.src_id != b.src_id) return a.src_id < b.src_id;
              return a.tgt_id < b.tgt_id;
            });
  std::set<std::string> used_src, used_tgt;
  std::vector<ScoredPair> out;
  for (ScoredPair& p : scored) {
    if (used_src.count(p.src_id) || used_tgt.count(p.tgt_id)) continue;
    used_src.insert(p.src_id);
    used_tgt.insert(p.tgt_id);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<SentencePair> extract_sentence_pairs(
    const std::vector<ScoredPair>& matches,
    const std::map<std::pair<std::string, std::string>, Alignment>& alignments,
    const std::map<std::string, EmbeddingMatrix>& embeddings,
    const std::map<std::string, LidRecord>& lids, const std::string& src_lang,
    const std::string& tgt_lang, double default_prob) {
  std::vector<SentencePair> out;
  for (const ScoredPair& match : matches) {
    auto key = std::make_pair(match.src_id, match.tgt_id);
    auto it = alignments.find(key);
    if (it == alignments.end())
      throw InputError("extract_sentence_pairs: no alignment for (" +
                       match.src_id + ", " + match.tgt_id + ")");
    const EmbeddingMatrix& src_emb = embeddings.at(match.src_id);
    const EmbeddingMatrix& tgt_emb = embeddings.at(match.tgt_id);
    auto ls = lids.find(match.src_id);
    auto lt = lids.find(match.tgt_id);
    const LidRecord* lid_src = ls == lids.end() ? nullptr : &ls->second;
    const LidRecord* lid_tgt = lt == lids.end() ? nullptr : &lt->second;
    for (const AlignmentLink& link : it->second.links) {
      if (link.kind != LinkKind::MATCH) continue;
      double c = cosine(
          std::span<const float>(src_emb.row(link.src_idx), src_emb.dim),
          std::span<const float>(tgt_emb.row(link.tgt_idx), tgt_emb.dim));
      double score =
          c * lid_prob(lid_src, link.src_idx, src_lang, default_prob) *
          lid_prob(lid_tgt, link.tgt_idx, tgt_lang, default_prob);
      out.push_back(SentencePair{score, match.src_id, link.src_idx,
                                 match.tgt_id, link.tgt_idx});
    }
  }
  std::sort(out.begin(), out.end(), [](const SentencePair& a,
                                       const SentencePair& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.src_id != b.src_id) return a.src_id < b.src_id;
    if (a.src_idx != b.src_idx) return a.src_idx < b.src_idx;
    if (a.tgt_id != b.tgt_id) return a.tgt_id < b.tgt_id;
    return a.tgt_idx < b.tgt_idx;
  });
  return out;
}

}  // namespace docalign
