// docalign: bilingual document alignment pipeline over sentence embeddings.
//
// Subcommands cover the full pipeline (run) and each stage individually
// (pca, docvec, candidates, align-score, match, extract), plus evaluation
// (eval-recall), a sentence-level margin mining baseline (mine-margin),
// and a synthetic corpus generator (synth).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "docalign/candidate_search.hpp"
#include "docalign/corpus_io.hpp"
#include "docalign/evaluation.hpp"
#include "docalign/pipeline.hpp"
#include "docalign/synth.hpp"
#include "docalign/vecmath.hpp"

using nlohmann::json;
using namespace docalign;

namespace {

json stats_to_json(const StageStats& stats) {
  json j;
  j["stage"] = stats.name;
  j["millis"] = stats.millis;
  for (const auto& [key, value] : stats.counts) j[key] = value;
  return j;
}

json summary_to_json(const PipelineSummary& summary) {
  json stages = json::array();
  for (const StageStats& s : summary) stages.push_back(stats_to_json(s));
  json j;
  j["stages"] = std::move(stages);
  return j;
}

void print_single(const StageStats& stats) {
  PipelineSummary summary{stats};
  std::cout << summary_to_json(summary).dump(2) << std::endl;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

struct CommonOpts {
  std::string corpus, embeddings, lid, out_dir;
  std::string src_lang = "en", tgt_lang = "fr";
  PipelineConfig cfg;
  std::string scheme = "lidf";
  std::string mode = "exact";
};

void add_align_flags(CLI::App* cmd, PipelineConfig& cfg) {
  cmd->add_option("--skip-cost", cfg.align.skip_cost,
                  "Cost of an unaligned sentence");
  cmd->add_option("--radius", cfg.align.radius,
                  "Band half-width of the coarse-to-fine aligner");
  cmd->add_option("--min-size", cfg.align.min_size,
                  "Size at or below which the exact aligner runs");
  cmd->add_option("--lid-default", cfg.lid_default,
                  "Probability assumed for missing LID entries");
  cmd->add_option("--threads", cfg.threads, "Worker threads");
}

int run_mine_margin(const std::string& corpus_path,
                    const std::string& embeddings_path,
                    const std::string& src_lang, const std::string& tgt_lang,
                    std::size_t k, const std::string& out_path) {
  auto docs = load_corpus(corpus_path);
  auto counts = sentence_counts(docs);
  auto embs = load_embeddings(embeddings_path, &counts);

  std::map<std::string, std::vector<const Document*>> domains;
  for (const Document& d : docs)
    if (d.size() > 0 && (d.lang == src_lang || d.lang == tgt_lang))
      domains[d.webdomain].push_back(&d);

  struct Row {
    std::string src_id;
    std::uint32_t src_idx;
    std::string tgt_id;
    std::uint32_t tgt_idx;
    double margin;
  };
  std::vector<Row> rows;
  for (const auto& [domain, members] : domains) {
    (void)domain;
    // flatten each side's sentences; doc order is corpus order
    EmbeddingMatrix src_side, tgt_side;
    std::vector<std::pair<const Document*, std::uint32_t>> src_map, tgt_map;
    for (const Document* d : members) {
      const EmbeddingMatrix& m = embs.at(d->doc_id);
      EmbeddingMatrix& side = d->lang == src_lang ? src_side : tgt_side;
      auto& index = d->lang == src_lang ? src_map : tgt_map;
      side.dim = m.dim;
      side.data.insert(side.data.end(), m.data.begin(), m.data.end());
      for (std::uint32_t s = 0; s < m.rows(); ++s) index.emplace_back(d, s);
    }
    if (src_map.empty() || tgt_map.empty()) continue;
    for (const MarginPair& p : margin_score_pairs(src_side, tgt_side, k)) {
      const auto& [sd, si] = src_map[p.src_idx];
      const auto& [td, ti] = tgt_map[p.tgt_idx];
      rows.push_back(Row{sd->doc_id, si, td->doc_id, ti, p.margin});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.margin != b.margin) return a.margin > b.margin;
    if (a.src_id != b.src_id) return a.src_id < b.src_id;
    return a.src_idx < b.src_idx;
  });

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw InputError("cannot write: " + out_path);
  for (const Row& r : rows)
    out << r.src_id << "\t" << r.src_idx << "\t" << r.tgt_id << "\t"
        << r.tgt_idx << "\t" << fmt6(r.margin) << "\n";

  json j;
  j["pairs"] = rows.size();
  std::cout << j.dump(2) << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Order-aware bilingual document alignment"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a key=value file");

  CommonOpts o;
  PipelineConfig& cfg = o.cfg;

  // run: full pipeline
  CLI::App* run = app.add_subcommand("run", "Run the full pipeline");
  run->add_option("--corpus", o.corpus, "Corpus JSONL")->required();
  run->add_option("--embeddings", o.embeddings, "Sentence embeddings (EMB1)")
      ->required();
  run->add_option("--lid", o.lid, "Sentence-level LID probabilities (JSONL)");
  run->add_option("--out-dir", o.out_dir, "Output directory")->required();
  run->add_option("--src-lang", o.src_lang, "Source language code");
  run->add_option("--tgt-lang", o.tgt_lang, "Target language code");
  run->add_option("--windows", cfg.window.windows, "Positional windows (J)");
  run->add_option("--gamma", cfg.window.gamma, "Window peakedness");
  run->add_option("--scheme", o.scheme,
                  "Boilerplate scheme: idf|lidf|length|none");
  run->add_option("--pca-dim", cfg.pca_dim, "Projection dim (0 = off)");
  run->add_option("--k", cfg.k, "Candidates per source document");
  run->add_option("--mode", o.mode, "Search mode: exact|approx");
  run->add_option("--seed", cfg.seed, "RNG seed");
  run->add_option("--min-score", cfg.min_match_score,
                  "Minimum re-score for matching");
  add_align_flags(run, cfg);

  // pca
  CLI::App* pca = app.add_subcommand("pca", "Fit and apply the projection");
  pca->add_option("--embeddings", o.embeddings, "Input embeddings")->required();
  pca->add_option("--pca-dim", cfg.pca_dim, "Projection dim");
  pca->add_option("--seed", cfg.seed, "Sampling seed");
  pca->add_option("--out-dir", o.out_dir, "Output directory")->required();

  // docvec
  CLI::App* docvec = app.add_subcommand("docvec", "Build document vectors");
  docvec->add_option("--corpus", o.corpus, "Corpus JSONL")->required();
  docvec->add_option("--embeddings", o.embeddings, "Sentence embeddings")
      ->required();
  docvec->add_option("--windows", cfg.window.windows, "Positional windows (J)");
  docvec->add_option("--gamma", cfg.window.gamma, "Window peakedness");
  docvec->add_option("--scheme", o.scheme,
                     "Boilerplate scheme: idf|lidf|length|none");
  docvec->add_option("--pca-dim", cfg.pca_dim,
                     "Projection dim recorded in the manifest");
  docvec->add_option("--out-dir", o.out_dir, "Output directory")->required();

  // candidates
  CLI::App* cand = app.add_subcommand("candidates", "Top-K candidate search");
  cand->add_option("--corpus", o.corpus, "Corpus JSONL")->required();
  cand->add_option("--docvecs", o.embeddings, "Document vectors (EMB1)")
      ->required();
  cand->add_option("--src-lang", o.src_lang, "Source language code");
  cand->add_option("--tgt-lang", o.tgt_lang, "Target language code");
  cand->add_option("--k", cfg.k, "Candidates per source document");
  cand->add_option("--mode", o.mode, "Search mode: exact|approx");
  cand->add_option("--seed", cfg.seed, "RNG seed");
  cand->add_option("--out-dir", o.out_dir, "Output directory")->required();

  // align-score
  CLI::App* rescore = app.add_subcommand("align-score",
                                         "Align and re-score candidates");
  rescore->add_option("--corpus", o.corpus, "Corpus JSONL")->required();
  rescore->add_option("--embeddings", o.embeddings, "Sentence embeddings")
      ->required();
  rescore->add_option("--lid", o.lid, "LID probabilities (JSONL)");
  std::string candidates_path;
  rescore->add_option("--candidates", candidates_path, "candidates.tsv")
      ->required();
  rescore->add_option("--tgt-lang", o.tgt_lang, "Target language code");
  rescore->add_option("--out-dir", o.out_dir, "Output directory")->required();
  add_align_flags(rescore, cfg);

  // match
  CLI::App* match = app.add_subcommand("match", "Greedy document matching");
  std::string scored_path;
  match->add_option("--scored", scored_path, "scored.tsv")->required();
  match->add_option("--min-score", cfg.min_match_score,
                    "Minimum re-score for matching");
  match->add_option("--out-dir", o.out_dir, "Output directory")->required();

  // extract
  CLI::App* extract = app.add_subcommand("extract", "Emit ranked sentence pairs");
  extract->add_option("--corpus", o.corpus, "Corpus JSONL")->required();
  extract->add_option("--embeddings", o.embeddings, "Sentence embeddings")
      ->required();
  extract->add_option("--lid", o.lid, "LID probabilities (JSONL)");
  std::string matches_path;
  extract->add_option("--matches", matches_path, "matches.tsv")->required();
  extract->add_option("--out-dir", o.out_dir, "Output directory")->required();
  add_align_flags(extract, cfg);

  // eval-recall
  CLI::App* eval = app.add_subcommand("eval-recall",
                                      "Soft document recall of predictions");
  std::string gold_path, pred_path;
  eval->add_option("--gold", gold_path, "Gold pairs TSV")->required();
  eval->add_option("--pred", pred_path, "Predicted pairs TSV")->required();
  eval->add_option("--corpus", o.corpus, "Corpus JSONL (document texts)")
      ->required();

  // mine-margin
  CLI::App* margin = app.add_subcommand(
      "mine-margin", "Margin-based sentence mining baseline");
  margin->add_option("--corpus", o.corpus, "Corpus JSONL")->required();
  margin->add_option("--embeddings", o.embeddings, "Sentence embeddings")
      ->required();
  margin->add_option("--src-lang", o.src_lang, "Source language code");
  margin->add_option("--tgt-lang", o.tgt_lang, "Target language code");
  std::size_t margin_k = 4;
  margin->add_option("--margin-k", margin_k, "Neighborhood size");
  margin->add_option("--out-dir", o.out_dir, "Output directory")->required();

  // synth
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  SynthSpec spec;
  synth->add_option("--pairs", spec.n_pairs, "Number of true document pairs");
  synth->add_option("--distractors", spec.n_distractors,
                    "Unrelated source-side documents");
  synth->add_option("--sent-min", spec.sent_min, "Minimum sentences per doc");
  synth->add_option("--sent-max", spec.sent_max, "Maximum sentences per doc");
  synth->add_option("--dim", spec.dim, "Embedding dimension");
  synth->add_option("--noise-sigma", spec.noise_sigma, "Target-side noise");
  synth->add_flag("--shuffle-distractors", spec.shuffle_distractors,
                  "Add one permuted copy of every true target");
  synth->add_option("--boilerplate-rate", spec.boilerplate_rate,
                    "Shared rows injected per document");
  synth->add_option("--seed", spec.seed, "RNG seed");
  synth->add_option("--src-lang", spec.src_lang, "Source language code");
  synth->add_option("--tgt-lang", spec.tgt_lang, "Target language code");
  synth->add_option("--out-dir", o.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const std::string dir = o.out_dir.empty() ? "." : o.out_dir;
    if (run->parsed()) {
      cfg.corpus_path = o.corpus;
      cfg.embeddings_path = o.embeddings;
      cfg.lid_path = o.lid;
      cfg.out_dir = dir;
      cfg.src_lang = o.src_lang;
      cfg.tgt_lang = o.tgt_lang;
      cfg.scheme = parse_scheme(o.scheme);
      cfg.mode = parse_search_mode(o.mode);
      std::cout << summary_to_json(run_pipeline(cfg)).dump(2) << std::endl;
    } else if (pca->parsed()) {
      std::filesystem::create_directories(dir);
      StageStats stats;
      stage_pca(o.embeddings, cfg.pca_dim, cfg.seed, dir + "/pca.bin",
                dir + "/projected.emb", stats);
      print_single(stats);
    } else if (docvec->parsed()) {
      std::filesystem::create_directories(dir);
      StageStats stats;
      stage_docvec(o.corpus, o.embeddings, cfg.window, parse_scheme(o.scheme),
                   cfg.pca_dim, dir + "/docvecs.emb",
                   dir + "/docvec_manifest.json", stats);
      print_single(stats);
    } else if (cand->parsed()) {
      std::filesystem::create_directories(dir);
      StageStats stats;
      stage_candidates(o.corpus, o.embeddings, o.src_lang, o.tgt_lang, cfg.k,
                       parse_search_mode(o.mode), cfg.seed,
                       dir + "/candidates.tsv", stats);
      print_single(stats);
    } else if (rescore->parsed()) {
      std::filesystem::create_directories(dir);
      StageStats stats;
      stage_align_score(o.corpus, o.embeddings, o.lid, candidates_path,
                        o.tgt_lang, cfg.align, cfg.lid_default, cfg.threads,
                        dir + "/scored.tsv", stats);
      print_single(stats);
    } else if (match->parsed()) {
      std::filesystem::create_directories(dir);
      StageStats stats;
      stage_match(scored_path, cfg.min_match_score, dir + "/matches.tsv",
                  stats);
      print_single(stats);
    } else if (extract->parsed()) {
      std::filesystem::create_directories(dir);
      StageStats stats;
      stage_extract(o.corpus, o.embeddings, o.lid, matches_path, cfg.align,
                    cfg.lid_default, cfg.threads, dir + "/sentence_pairs.tsv",
                    stats);
      print_single(stats);
    } else if (eval->parsed()) {
      auto docs = load_corpus(o.corpus);
      GoldPairs gold;
      for (const Document& d : docs) {
        std::string text;
        for (std::size_t s = 0; s < d.size(); ++s) {
          if (s > 0) text += "\n";
          text += d.sentences[s];
        }
        gold.texts[d.doc_id] = std::move(text);
      }
      for (auto& [s, t] : load_pairs_tsv(gold_path)) gold.pairs.emplace(s, t);
      std::set<std::pair<std::string, std::string>> pred;
      for (auto& [s, t] : load_pairs_tsv(pred_path)) pred.emplace(s, t);
      RecallResult r = soft_recall(pred, gold);
      json j;
      j["gold"] = r.gold;
      j["credited"] = r.credited;
      j["recall"] = r.recall;
      std::cout << j.dump(2) << std::endl;
    } else if (margin->parsed()) {
      std::filesystem::create_directories(dir);
      return run_mine_margin(o.corpus, o.embeddings, o.src_lang, o.tgt_lang,
                             margin_k, dir + "/margin_pairs.tsv");
    } else if (synth->parsed()) {
      write_synth_corpus(synth_corpus(spec), dir);
      json j;
      j["out_dir"] = dir;
      j["pairs"] = spec.n_pairs;
      std::cout << j.dump(2) << std::endl;
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << std::endl;
    return 2;
  }
  return 0;
}
