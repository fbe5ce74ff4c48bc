#ifndef DOCALIGN_SYNTH_HPP
#define DOCALIGN_SYNTH_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "docalign/types.hpp"

namespace docalign {

// Synthetic bilingual corpus in embedding space. Cross-lingual
// correspondence is modeled as one fixed random rotation applied to both
// sides of each pair plus per-row Gaussian noise, so paired documents are
// controllably close under cosine while all stored vectors stay generic.
struct SynthSpec {
  std::size_t n_pairs = 10;
  std::size_t n_distractors = 0;   // unrelated source-side documents
  std::size_t sent_min = 10;
  std::size_t sent_max = 30;
  std::uint32_t dim = 32;
  double noise_sigma = 0.0;
  bool shuffle_distractors = false;  // one permuted copy per true target
  double boilerplate_rate = 0.0;     // shared rows injected per document
  std::uint64_t seed = 0;
  std::string src_lang = "en";
  std::string tgt_lang = "fr";
  std::string webdomain = "synth.example";
};

struct SynthCorpus {
  std::vector<Document> docs;
  std::map<std::string, EmbeddingMatrix> embeddings;
  std::map<std::string, LidRecord> lids;
  std::set<std::pair<std::string, std::string>> gold;
};

// Deterministic for a fixed spec: the same seed yields bit-identical
// documents, embeddings, LID records, and gold pairs.
SynthCorpus synth_corpus(const SynthSpec& spec);

// Writes corpus.jsonl, embeddings.emb, lid.jsonl, and gold.tsv to dir.
void write_synth_corpus(const SynthCorpus& corpus, const std::string& dir);

}  // namespace docalign

#endif  // DOCALIGN_SYNTH_HPP
