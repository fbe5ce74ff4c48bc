#include <doctest.h>

#include <cmath>
#include <fstream>

#include "docalign/corpus_io.hpp"
#include "docalign/evaluation.hpp"
#include "docalign/pipeline.hpp"
#include "docalign/synth.hpp"
#include "docalign/vecmath.hpp"
#include "test_util.hpp"

using namespace docalign;
using testutil::TempDir;
using testutil::read_file;

namespace {

SynthSpec mini_spec() {
  SynthSpec spec;
  spec.n_pairs = 10;
  spec.n_distractors = 5;
  spec.sent_min = 12;
  spec.sent_max = 24;
  spec.dim = 32;
  spec.noise_sigma = 0.05;
  spec.shuffle_distractors = true;
  spec.boilerplate_rate = 0.1;
  spec.seed = 7;
  return spec;
}

PipelineConfig mini_config(const std::string& in_dir,
                           const std::string& out_dir) {
  PipelineConfig cfg;
  cfg.corpus_path = in_dir + "/corpus.jsonl";
  cfg.embeddings_path = in_dir + "/embeddings.emb";
  cfg.lid_path = in_dir + "/lid.jsonl";
  cfg.out_dir = out_dir;
  cfg.src_lang = "en";
  cfg.tgt_lang = "fr";
  cfg.min_match_score = 0.5;  // keeps leftover low-score pairs out
  return cfg;
}

GoldPairs gold_from(const SynthCorpus& corpus) {
  GoldPairs gold;
  gold.pairs = corpus.gold;
  for (const Document& d : corpus.docs) {
    std::string text;
    for (std::size_t s = 0; s < d.size(); ++s) {
      if (s > 0) text += "\n";
      text += d.sentences[s];
    }
    gold.texts[d.doc_id] = std::move(text);
  }
  return gold;
}

}  // namespace

TEST_CASE("pipeline defaults match the documented operating point") {
  PipelineConfig cfg;
  CHECK(cfg.window.windows == 16);
  CHECK(cfg.window.gamma == doctest::Approx(20.0));
  CHECK(cfg.k == 32);
  CHECK(cfg.pca_dim == 128);
  CHECK(cfg.scheme == BoilerplateScheme::LIDF);
  CHECK(cfg.align.skip_cost == doctest::Approx(0.5));
  CHECK(cfg.align.radius == 5);
  CHECK(cfg.align.min_size == 10);
  CHECK(cfg.mode == SearchMode::EXACT);
}

TEST_CASE("synthetic corpora are deterministic under a seed") {
  TempDir a, b;
  SynthSpec spec = mini_spec();
  write_synth_corpus(synth_corpus(spec), a.path.string());
  write_synth_corpus(synth_corpus(spec), b.path.string());
  for (const char* name :
       {"corpus.jsonl", "embeddings.emb", "lid.jsonl", "gold.tsv"}) {
    CHECK(read_file(a.file(name)) == read_file(b.file(name)));
    CHECK(!read_file(a.file(name)).empty());
  }

  SynthSpec other = spec;
  other.seed = 8;
  TempDir c;
  write_synth_corpus(synth_corpus(other), c.path.string());
  CHECK(read_file(a.file("embeddings.emb")) !=
        read_file(c.file("embeddings.emb")));
}

TEST_CASE("noiseless targets are found at rank one with cosine one") {
  SynthSpec spec;
  spec.n_pairs = 15;
  spec.sent_min = 5;
  spec.sent_max = 20;
  spec.dim = 16;
  spec.noise_sigma = 0.0;
  spec.seed = 3;
  SynthCorpus corpus = synth_corpus(spec);

  std::map<std::string, std::vector<Document>> domains;
  for (const Document& d : corpus.docs) domains[d.webdomain].push_back(d);
  WindowConfig wcfg;
  std::map<std::string, DocVector> vecs;
  for (const auto& [domain, members] : domains) {
    (void)domain;
    BoilerplateTable table = build_boilerplate_table(members);
    for (const Document& d : members)
      vecs[d.doc_id] = build_docvector(d, corpus.embeddings.at(d.doc_id),
                                       table, BoilerplateScheme::LIDF, wcfg);
  }
  auto candidates = generate_candidates(corpus.docs, vecs, "en", "fr", 1);
  std::map<std::string, std::string> top1;
  std::map<std::string, float> top_cos;
  for (const CandidatePair& c : candidates) {
    top1[c.src_id] = c.tgt_id;
    top_cos[c.src_id] = c.cosine;
  }
  for (const auto& [s, t] : corpus.gold) {
    REQUIRE(top1.count(s) == 1);
    CHECK(top1.at(s) == t);
    CHECK(std::fabs(double(top_cos.at(s)) - 1.0) < 1e-5);
  }
}

TEST_CASE("shuffled copies fool averaging but not windowed vectors") {
  SynthSpec spec = mini_spec();
  spec.boilerplate_rate = 0.0;
  SynthCorpus corpus = synth_corpus(spec);

  std::vector<Document> docs = corpus.docs;
  BoilerplateTable table = build_boilerplate_table(docs);
  WindowConfig wcfg;
  for (std::size_t p = 0; p < spec.n_pairs; ++p) {
    char id[16];
    std::snprintf(id, sizeof(id), "fr_%05zu", p);
    char sid[16];
    std::snprintf(sid, sizeof(sid), "fr_s%05zu", p);
    const Document *orig = nullptr, *copy = nullptr;
    for (const Document& d : docs) {
      if (d.doc_id == id) orig = &d;
      if (d.doc_id == sid) copy = &d;
    }
    REQUIRE(orig != nullptr);
    REQUIRE(copy != nullptr);

    DocVector avg_orig = baseline_avg_docvector(
        *orig, corpus.embeddings.at(orig->doc_id), table,
        BoilerplateScheme::LIDF);
    DocVector avg_copy = baseline_avg_docvector(
        *copy, corpus.embeddings.at(copy->doc_id), table,
        BoilerplateScheme::LIDF);
    CHECK(cosine(avg_orig.data, avg_copy.data) > 1.0 - 1e-9);

    DocVector win_orig =
        build_docvector(*orig, corpus.embeddings.at(orig->doc_id), table,
                        BoilerplateScheme::LIDF, wcfg);
    DocVector win_copy =
        build_docvector(*copy, corpus.embeddings.at(copy->doc_id), table,
                        BoilerplateScheme::LIDF, wcfg);
    CHECK(cosine(win_orig.data, win_copy.data) < 0.999);
  }
}

TEST_CASE("full pipeline on the miniature fixture") {
  TempDir in_dir, out_dir;
  SynthCorpus corpus = synth_corpus(mini_spec());
  write_synth_corpus(corpus, in_dir.path.string());

  PipelineConfig cfg =
      mini_config(in_dir.path.string(), out_dir.path.string());
  PipelineSummary summary = run_pipeline(cfg);

  std::map<std::string, std::uint64_t> counts;
  for (const StageStats& s : summary)
    for (const auto& [k, v] : s.counts) counts[s.name + "." + k] = v;
  CHECK(counts.at("docvec.vectors") == 35);  // 20 gold + 10 shuffled + 5 unrelated
  CHECK(counts.at("match.matches") == 10);

  auto matches = load_pairs_tsv(out_dir.file("matches.tsv"));
  REQUIRE(matches.size() == 10);
  std::set<std::pair<std::string, std::string>> pred(matches.begin(),
                                                     matches.end());
  RecallResult recall = soft_recall(pred, gold_from(corpus));
  CHECK(recall.recall == doctest::Approx(1.0));

  // sentence pairs were extracted for each match
  auto tsv = read_file(out_dir.file("sentence_pairs.tsv"));
  CHECK(!tsv.empty());
}

TEST_CASE("monolingual corpora run to completion with zero matches") {
  TempDir in_dir, out_dir;
  SynthSpec spec;
  spec.n_pairs = 3;
  spec.sent_min = 4;
  spec.sent_max = 8;
  spec.dim = 16;
  spec.seed = 5;
  SynthCorpus corpus = synth_corpus(spec);
  // strip the target side entirely
  std::vector<Document> mono;
  std::map<std::string, EmbeddingMatrix> embs;
  std::map<std::string, LidRecord> lids;
  for (const Document& d : corpus.docs)
    if (d.lang == "en") {
      mono.push_back(d);
      embs[d.doc_id] = corpus.embeddings.at(d.doc_id);
      lids[d.doc_id] = corpus.lids.at(d.doc_id);
    }
  store_corpus(mono, in_dir.file("corpus.jsonl"));
  store_embeddings(embs, in_dir.file("embeddings.emb"));
  store_lid(lids, in_dir.file("lid.jsonl"));

  PipelineConfig cfg =
      mini_config(in_dir.path.string(), out_dir.path.string());
  PipelineSummary summary = run_pipeline(cfg);
  std::map<std::string, std::uint64_t> counts;
  for (const StageStats& s : summary)
    for (const auto& [k, v] : s.counts) counts[s.name + "." + k] = v;
  CHECK(counts.at("candidates.candidates") == 0);
  CHECK(counts.at("match.matches") == 0);
  CHECK(counts.at("extract.sentence_pairs") == 0);
}

TEST_CASE("stage failures carry the stage name") {
  TempDir out_dir;
  PipelineConfig cfg;
  cfg.corpus_path = out_dir.file("missing.jsonl");
  cfg.embeddings_path = out_dir.file("missing.emb");
  cfg.out_dir = out_dir.path.string();
  cfg.src_lang = "en";
  cfg.tgt_lang = "fr";
  CHECK_THROWS_WITH_AS(run_pipeline(cfg), doctest::Contains("pca:"),
                       InputError);
}

TEST_CASE("empty documents are skipped, not vectorized") {
  TempDir in_dir, out_dir;
  SynthSpec spec;
  spec.n_pairs = 2;
  spec.sent_min = 4;
  spec.sent_max = 6;
  spec.dim = 16;
  spec.seed = 9;
  SynthCorpus corpus = synth_corpus(spec);
  corpus.docs.push_back(Document{"en_empty", "synth.example", "en", {}});
  corpus.embeddings["en_empty"] = EmbeddingMatrix{16, {}};
  corpus.lids["en_empty"] = LidRecord{"en_empty", {}};
  write_synth_corpus(corpus, in_dir.path.string());

  PipelineConfig cfg =
      mini_config(in_dir.path.string(), out_dir.path.string());
  PipelineSummary summary = run_pipeline(cfg);
  std::map<std::string, std::uint64_t> counts;
  for (const StageStats& s : summary)
    for (const auto& [k, v] : s.counts) counts[s.name + "." + k] = v;
  CHECK(counts.at("docvec.skipped_empty") == 1);
  CHECK(counts.at("docvec.vectors") == 4);
}
