#ifndef DOCALIGN_ALIGNMENT_HPP
#define DOCALIGN_ALIGNMENT_HPP

#include <cstdint>
#include <vector>

#include "docalign/types.hpp"

namespace docalign {

struct AlignConfig {
  double skip_cost = 0.5;      // cost of an unaligned sentence
  std::uint32_t radius = 5;    // half-width of the coarse-to-fine band
  std::uint32_t min_size = 10; // below this, run the exact DP
};

enum class LinkKind : std::uint8_t { MATCH, DEL, INS };

constexpr std::uint32_t kNoIndex = 0xFFFFFFFFu;

// MATCH carries both indices; DEL only src_idx; INS only tgt_idx.
struct AlignmentLink {
  LinkKind kind = LinkKind::MATCH;
  std::uint32_t src_idx = kNoIndex;
  std::uint32_t tgt_idx = kNoIndex;

  bool operator==(const AlignmentLink&) const = default;
};

// Monotonic cover of both documents: every src index appears in exactly
// one MATCH/DEL, every tgt index in exactly one MATCH/INS, in order.
struct Alignment {
  std::vector<AlignmentLink> links;
  double cost = 0.0;
};

// Full O(N*M) minimum-cost DP over 1-1 matches plus indels, with
// cost(MATCH e,f) = 1 - cos(e,f) and cost(DEL) = cost(INS) = skip_cost.
// Ties during backtrace prefer MATCH, then DEL, then INS. Zero rows have
// cosine 0 against everything.
Alignment align_exact(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                      const AlignConfig& cfg = {});

// Halves the row count: row i = unit_normalize(row_2i + row_2i+1); an odd
// trailing row passes through normalized.
EmbeddingMatrix downsample(const EmbeddingMatrix& emb);

// Linear-time approximation: recursively align downsampled documents,
// project the coarse path to fine resolution, and run the DP restricted
// to a band of half-width cfg.radius around the projected path. Small
// inputs (max(N,M) <= cfg.min_size) go straight to align_exact.
Alignment align_coarse_to_fine(const EmbeddingMatrix& src,
                               const EmbeddingMatrix& tgt,
                               const AlignConfig& cfg = {});

}  // namespace docalign

#endif  // DOCALIGN_ALIGNMENT_HPP
