#ifndef DOCALIGN_DOCVEC_HPP
#define DOCALIGN_DOCVEC_HPP

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "docalign/types.hpp"

namespace docalign {

// Positional window parameters: number of overlapping windows J and the
// peakedness gamma of the modified PERT density.
struct WindowConfig {
  std::uint32_t windows = 16;  // J
  double gamma = 20.0;
};

enum class BoilerplateScheme { IDF, LIDF, LENGTH, NONE };

BoilerplateScheme parse_scheme(const std::string& name);
std::string scheme_name(BoilerplateScheme scheme);

// Document frequency of each normalized sentence within one webdomain:
// the number of documents containing the sentence at least once.
struct BoilerplateTable {
  std::unordered_map<std::string, std::uint32_t> df;
};

// Order-aware document vector: J unit-normalized (or all-zero) sub-vectors
// of length sub_dim, concatenated.
struct DocVector {
  std::uint32_t sub_dim = 0;
  std::uint32_t windows = 0;
  std::vector<float> data;

  std::size_t size() const { return data.size(); }
};

// Row j holds the modified PERT density with support [0, N] and mode
// ((j+0.5)/J)*N, evaluated at sentence midpoints x = n+0.5 and normalized
// to sum 1. Shape parameters: alpha = 1 + gamma*mode/N,
// beta = 1 + gamma*(N-mode)/N.
std::vector<std::vector<double>> pert_window_weights(std::size_t n_sentences,
                                                     const WindowConfig& cfg);

// All docs must belong to one webdomain. Counting is per document, with
// whitespace-collapsed, trimmed sentence text as the key.
BoilerplateTable build_boilerplate_table(std::span<const Document> docs);

// IDF -> 1/(1+ln df); LIDF -> 1/df; LENGTH -> code point count; NONE -> 1.
double boilerplate_weight(const std::string& sentence,
                          const BoilerplateTable& table,
                          BoilerplateScheme scheme);

// V_j = sum_n emb(S_n) * H_j(n) * B(S_n), before normalization.
std::vector<std::vector<float>> build_subvectors(
    const EmbeddingMatrix& emb,
    const std::vector<std::vector<double>>& windows,
    const std::vector<double>& bweights);

// Concatenation of the unit-normalized sub-vectors; length J * emb.dim.
DocVector build_docvector(const Document& doc, const EmbeddingMatrix& emb,
                          const BoilerplateTable& table,
                          BoilerplateScheme scheme, const WindowConfig& cfg);

// Order-invariant baseline: one uniform window, boilerplate-weighted sum,
// normalized.
DocVector baseline_avg_docvector(const Document& doc,
                                 const EmbeddingMatrix& emb,
                                 const BoilerplateTable& table,
                                 BoilerplateScheme scheme);

}  // namespace docalign

#endif  // DOCALIGN_DOCVEC_HPP
