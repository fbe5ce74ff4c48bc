#ifndef DOCALIGN_CORPUS_IO_HPP
#define DOCALIGN_CORPUS_IO_HPP

#include <map>
#include <string>
#include <vector>

#include "docalign/pca.hpp"
#include "docalign/types.hpp"

namespace docalign {

// Corpus files are JSONL, one document per line:
//   {"doc_id":..., "webdomain":..., "lang":..., "sentences":[...]}
// Documents are returned in file order; duplicate doc_ids are an error.
std::vector<Document> load_corpus(const std::string& path);

void store_corpus(const std::vector<Document>& docs, const std::string& path);

// Embedding container ("EMB1", little-endian):
//   magic "EMB1" | u32 dim | u64 record count |
//   per record: u32 id length, id bytes, u32 rows, rows*dim f32 row-major.
// `expected` maps doc_id -> sentence count; every expected id must be
// present with a matching row count. Records not in `expected` are kept.
std::map<std::string, EmbeddingMatrix> load_embeddings(
    const std::string& path,
    const std::map<std::string, std::size_t>* expected = nullptr);

// Round trip through load_embeddings is bit-exact. All matrices must
// share one dim.
void store_embeddings(const std::map<std::string, EmbeddingMatrix>& data,
                      const std::string& path);

// LID files are JSONL: {"doc_id":..., "probs":[{"en":0.99,...},...]}.
// Probabilities outside [0,1] are rejected. When `expected` is given,
// per-document sentence counts are checked against it.
std::map<std::string, LidRecord> load_lid(
    const std::string& path,
    const std::map<std::string, std::size_t>* expected = nullptr);

void store_lid(const std::map<std::string, LidRecord>& data,
               const std::string& path);

// PCA model container ("PCA1", little-endian):
//   magic "PCA1" | u32 input_dim | u32 output_dim |
//   input_dim f32 mean | output_dim*input_dim f32 components row-major.
PcaModel load_pca_model(const std::string& path);
void store_pca_model(const PcaModel& model, const std::string& path);

// Sentence counts per doc_id, for cross-file consistency checks.
std::map<std::string, std::size_t> sentence_counts(
    const std::vector<Document>& docs);

}  // namespace docalign

#endif  // DOCALIGN_CORPUS_IO_HPP
