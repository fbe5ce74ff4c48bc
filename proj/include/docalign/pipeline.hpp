#ifndef DOCALIGN_PIPELINE_HPP
#define DOCALIGN_PIPELINE_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "docalign/alignment.hpp"
#include "docalign/candidate_search.hpp"
#include "docalign/docvec.hpp"
#include "docalign/scoring.hpp"
#include "docalign/types.hpp"

namespace docalign {

struct PipelineConfig {
  std::string corpus_path;
  std::string embeddings_path;
  std::string lid_path;  // optional; empty disables LID penalties
  std::string out_dir;
  std::string src_lang;
  std::string tgt_lang;

  WindowConfig window;  // J, gamma
  BoilerplateScheme scheme = BoilerplateScheme::LIDF;
  std::uint32_t pca_dim = 128;  // 0 disables projection
  std::size_t k = 32;
  AlignConfig align;
  SearchMode mode = SearchMode::EXACT;
  std::uint64_t seed = 0;
  std::uint32_t threads = 1;
  double lid_default = 1.0;  // probability for missing LID entries
  // Scored pairs below this are dropped before matching. Scores lie in
  // [-1, 1], so -2 keeps everything.
  double min_match_score = -2.0;
};

struct StageStats {
  std::string name;
  double millis = 0.0;
  std::vector<std::pair<std::string, std::uint64_t>> counts;
};

using PipelineSummary = std::vector<StageStats>;

// Output writers go through a ".partial" temp name and rename on success,
// so an aborted stage leaves only ".partial" files behind.

// Fits a projection on a uniform sample of up to 100k rows (seeded) and
// writes model_path plus the projected embeddings. Skipped (returns false)
// when pca_dim is 0 or not below the embedding dim.
bool stage_pca(const std::string& embeddings_path, std::uint32_t pca_dim,
               std::uint64_t seed, const std::string& model_path,
               const std::string& projected_path, StageStats& stats);

// Builds one order-aware vector per non-empty document and writes them in
// the embedding container (dim = J * d) plus a JSON manifest with
// {J, gamma, scheme, pca_dim}.
void stage_docvec(const std::string& corpus_path,
                  const std::string& embeddings_path, const WindowConfig& cfg,
                  BoilerplateScheme scheme, std::uint32_t manifest_pca_dim,
                  const std::string& docvecs_path,
                  const std::string& manifest_path, StageStats& stats);

void stage_candidates(const std::string& corpus_path,
                      const std::string& docvecs_path,
                      const std::string& src_lang, const std::string& tgt_lang,
                      std::size_t k, SearchMode mode, std::uint64_t seed,
                      const std::string& out_path, StageStats& stats);

// Aligns and re-scores every candidate pair; each document's sentences are
// LID-penalized against its own nominal language. Output rows are oriented
// with the non-tgt_lang document first, whichever side ran the queries.
void stage_align_score(const std::string& corpus_path,
                       const std::string& embeddings_path,
                       const std::string& lid_path,
                       const std::string& candidates_path,
                       const std::string& tgt_lang, const AlignConfig& align,
                       double lid_default, std::uint32_t threads,
                       const std::string& out_path, StageStats& stats);

void stage_match(const std::string& scored_path, double min_score,
                 const std::string& out_path, StageStats& stats);

void stage_extract(const std::string& corpus_path,
                   const std::string& embeddings_path,
                   const std::string& lid_path,
                   const std::string& matches_path, const AlignConfig& align,
                   double lid_default, std::uint32_t threads,
                   const std::string& out_path, StageStats& stats);

// Full run: pca (optional) -> docvec -> candidates -> align/score ->
// match -> extract, all under cfg.out_dir. Any stage failure is rethrown
// with the stage name prefixed.
PipelineSummary run_pipeline(const PipelineConfig& cfg);

// TSV row types and readers shared by the stages and the CLI.
std::vector<CandidatePair> load_candidates_tsv(const std::string& path);
std::vector<ScoredPair> load_scored_tsv(const std::string& path);
std::vector<std::pair<std::string, std::string>> load_pairs_tsv(
    const std::string& path);

}  // namespace docalign

#endif  // DOCALIGN_PIPELINE_HPP
