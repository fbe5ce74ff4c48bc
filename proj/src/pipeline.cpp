#include "docalign/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <thread>

#include <json.hpp>

#include "docalign/corpus_io.hpp"
#include "docalign/pca.hpp"
#include "docalign/vecmath.hpp"

namespace docalign {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Writes to "<path>.partial" and renames into place on commit, so an
// aborted stage never leaves a truncated final file.
class AtomicFile {
 public:
  explicit AtomicFile(std::string path)
      : path_(std::move(path)), tmp_(path_ + ".partial"),
        out_(tmp_, std::ios::binary) {
    if (!out_) throw InputError("cannot write: " + tmp_);
  }

  std::ofstream& stream() { return out_; }

  void commit() {
    out_.flush();
    if (!out_) throw InputError("write failed: " + tmp_);
    out_.close();
    fs::rename(tmp_, path_);
  }

 private:
  std::string path_;
  std::string tmp_;
  std::ofstream out_;
};

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Interior tabs and newlines would break the TSV framing.
std::string tsv_safe(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  return out;
}

std::vector<std::string> split_tsv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return out;
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double millis() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void parallel_for(std::size_t n, std::uint32_t threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };
  std::vector<std::thread> pool;
  std::uint32_t count = std::uint32_t(std::min<std::size_t>(threads, n));
  pool.reserve(count);
  for (std::uint32_t t = 0; t < count; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// doc_id -> matrix with unit-normalized rows, as the aligner expects.
std::map<std::string, EmbeddingMatrix> normalized_embeddings(
    std::map<std::string, EmbeddingMatrix> embs) {
  for (auto& [id, m] : embs) {
    (void)id;
    for (std::size_t r = 0; r < m.rows(); ++r)
      unit_normalize_inplace(std::span<float>(m.row(r), m.dim));
  }
  return embs;
}

std::map<std::string, LidRecord> load_lid_optional(
    const std::string& lid_path,
    const std::map<std::string, std::size_t>& counts) {
  if (lid_path.empty()) return {};
  return load_lid(lid_path, &counts);
}

}  // namespace

bool stage_pca(const std::string& embeddings_path, std::uint32_t pca_dim,
               std::uint64_t seed, const std::string& model_path,
               const std::string& projected_path, StageStats& stats) {
  Timer timer;
  stats.name = "pca";
  auto embs = load_embeddings(embeddings_path);
  std::uint32_t dim = 0;
  std::size_t total_rows = 0;
  for (const auto& [id, m] : embs) {
    (void)id;
    dim = m.dim;
    total_rows += m.rows();
  }
  if (pca_dim == 0 || pca_dim >= dim || embs.empty()) {
    stats.counts.emplace_back("skipped", 1);
    stats.millis = timer.millis();
    return false;
  }

  // uniform sample of rows, capped to bound memory
  constexpr std::size_t kSampleCap = 100000;
  std::vector<std::size_t> picked;
  if (total_rows <= kSampleCap) {
    picked.resize(total_rows);
    for (std::size_t i = 0; i < total_rows; ++i) picked[i] = i;
  } else {
    std::vector<std::size_t> all(total_rows);
    for (std::size_t i = 0; i < total_rows; ++i) all[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < kSampleCap; ++i) {
      std::size_t j = i + std::size_t(rng() % (total_rows - i));
      std::swap(all[i], all[j]);
    }
    picked.assign(all.begin(), all.begin() + kSampleCap);
    std::sort(picked.begin(), picked.end());
  }

  EmbeddingMatrix sample;
  sample.dim = dim;
  sample.data.reserve(picked.size() * dim);
  std::size_t row_base = 0;
  std::size_t next = 0;
  for (const auto& [id, m] : embs) {
    (void)id;
    while (next < picked.size() && picked[next] < row_base + m.rows()) {
      const float* row = m.row(picked[next] - row_base);
      sample.data.insert(sample.data.end(), row, row + dim);
      ++next;
    }
    row_base += m.rows();
  }

  PcaModel model = fit_pca(sample, pca_dim);
  store_pca_model(model, model_path + ".partial");
  fs::rename(model_path + ".partial", model_path);

  std::map<std::string, EmbeddingMatrix> projected;
  for (const auto& [id, m] : embs) projected[id] = apply_pca(model, m);
  store_embeddings(projected, projected_path + ".partial");
  fs::rename(projected_path + ".partial", projected_path);

  stats.counts.emplace_back("sampled_rows", picked.size());
  stats.counts.emplace_back("input_dim", dim);
  stats.counts.emplace_back("output_dim", pca_dim);
  stats.millis = timer.millis();
  return true;
}

void stage_docvec(const std::string& corpus_path,
                  const std::string& embeddings_path, const WindowConfig& cfg,
                  BoilerplateScheme scheme, std::uint32_t manifest_pca_dim,
                  const std::string& docvecs_path,
                  const std::string& manifest_path, StageStats& stats) {
  Timer timer;
  stats.name = "docvec";
  auto docs = load_corpus(corpus_path);
  auto counts = sentence_counts(docs);
  auto embs = load_embeddings(embeddings_path, &counts);

  // boilerplate statistics are per webdomain
  std::map<std::string, std::vector<Document>> domains;
  for (const Document& d : docs) domains[d.webdomain].push_back(d);

  std::map<std::string, DocVector> vectors;
  std::size_t skipped_empty = 0;
  for (const auto& [domain, members] : domains) {
    (void)domain;
    BoilerplateTable table = build_boilerplate_table(members);
    for (const Document& d : members) {
      if (d.size() == 0) {
        ++skipped_empty;
        continue;
      }
      vectors[d.doc_id] =
          build_docvector(d, embs.at(d.doc_id), table, scheme, cfg);
    }
  }

  std::map<std::string, EmbeddingMatrix> out;
  for (const auto& [id, v] : vectors) {
    EmbeddingMatrix m;
    m.dim = static_cast<std::uint32_t>(v.size());
    m.data = v.data;
    out[id] = std::move(m);
  }
  store_embeddings(out, docvecs_path + ".partial");
  fs::rename(docvecs_path + ".partial", docvecs_path);

  json manifest;
  manifest["J"] = cfg.windows;
  manifest["gamma"] = cfg.gamma;
  manifest["scheme"] = scheme_name(scheme);
  manifest["pca_dim"] = manifest_pca_dim;
  AtomicFile mf(manifest_path);
  mf.stream() << manifest.dump(2) << "\n";
  mf.commit();

  stats.counts.emplace_back("documents", docs.size());
  stats.counts.emplace_back("vectors", vectors.size());
  stats.counts.emplace_back("skipped_empty", skipped_empty);
  stats.millis = timer.millis();
}

namespace {

std::map<std::string, DocVector> load_docvecs(const std::string& path) {
  std::map<std::string, DocVector> out;
  for (auto& [id, m] : load_embeddings(path)) {
    if (m.rows() != 1)
      throw InputError(path + ": document vector record \"" + id +
                       "\" must have exactly one row");
    DocVector v;
    v.sub_dim = m.dim;
    v.windows = 1;
    v.data = std::move(m.data);
    out[id] = std::move(v);
  }
  return out;
}

}  // namespace

void stage_candidates(const std::string& corpus_path,
                      const std::string& docvecs_path,
                      const std::string& src_lang, const std::string& tgt_lang,
                      std::size_t k, SearchMode mode, std::uint64_t seed,
                      const std::string& out_path, StageStats& stats) {
  Timer timer;
  stats.name = "candidates";
  auto docs = load_corpus(corpus_path);
  auto docvecs = load_docvecs(docvecs_path);
  auto pairs =
      generate_candidates(docs, docvecs, src_lang, tgt_lang, k, mode, seed);

  AtomicFile file(out_path);
  for (const CandidatePair& c : pairs)
    file.stream() << c.src_id << "\t" << c.tgt_id << "\t" << c.rank << "\t"
                  << fmt6(c.cosine) << "\n";
  file.commit();

  stats.counts.emplace_back("candidates", pairs.size());
  stats.millis = timer.millis();
}

std::vector<CandidatePair> load_candidates_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open candidates file: " + path);
  std::vector<CandidatePair> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cols = split_tsv(line);
    if (cols.size() != 4)
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": expected 4 columns");
    CandidatePair c;
    c.src_id = cols[0];
    c.tgt_id = cols[1];
    c.rank = static_cast<std::uint32_t>(std::stoul(cols[2]));
    c.cosine = std::stof(cols[3]);
    out.push_back(std::move(c));
  }
  return out;
}

void stage_align_score(const std::string& corpus_path,
                       const std::string& embeddings_path,
                       const std::string& lid_path,
                       const std::string& candidates_path,
                       const std::string& tgt_lang, const AlignConfig& align,
                       double lid_default, std::uint32_t threads,
                       const std::string& out_path, StageStats& stats) {
  Timer timer;
  stats.name = "align_score";
  auto docs = load_corpus(corpus_path);
  auto counts = sentence_counts(docs);
  auto embs = normalized_embeddings(load_embeddings(embeddings_path, &counts));
  auto lids = load_lid_optional(lid_path, counts);
  std::map<std::string, const std::string*> lang_of;
  for (const Document& d : docs) lang_of[d.doc_id] = &d.lang;
  auto candidates = load_candidates_tsv(candidates_path);

  auto lid_of = [&](const std::string& id) -> const LidRecord* {
    auto it = lids.find(id);
    return it == lids.end() ? nullptr : &it->second;
  };

  std::vector<ScoredPair> scored(candidates.size());
  parallel_for(candidates.size(), threads, [&](std::size_t i) {
    const CandidatePair& c = candidates[i];
    const EmbeddingMatrix& a = embs.at(c.src_id);
    const EmbeddingMatrix& b = embs.at(c.tgt_id);
    Alignment alignment = align_coarse_to_fine(a, b, align);
    // each document is penalized against its own nominal language
    double s = score_pair(alignment, a, b, lid_of(c.src_id), lid_of(c.tgt_id),
                          *lang_of.at(c.src_id), *lang_of.at(c.tgt_id),
                          lid_default);
    scored[i] = ScoredPair{c.src_id, c.tgt_id, c.cosine, s};
  });

  // candidate queries may run from either language side (the larger side
  // queries the smaller); downstream files are always written with the
  // configured source language first
  for (ScoredPair& p : scored)
    if (*lang_of.at(p.src_id) == tgt_lang) std::swap(p.src_id, p.tgt_id);

  AtomicFile file(out_path);
  for (const ScoredPair& p : scored)
    file.stream() << p.src_id << "\t" << p.tgt_id << "\t" << fmt6(p.cosine)
                  << "\t" << fmt6(p.score) << "\n";
  file.commit();

  stats.counts.emplace_back("scored", scored.size());
  stats.millis = timer.millis();
}

std::vector<ScoredPair> load_scored_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scored pairs file: " + path);
  std::vector<ScoredPair> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cols = split_tsv(line);
    if (cols.size() != 4)
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": expected 4 columns");
    out.push_back(ScoredPair{cols[0], cols[1], std::stof(cols[2]),
                             std::stod(cols[3])});
  }
  return out;
}

void stage_match(const std::string& scored_path, double min_score,
                 const std::string& out_path, StageStats& stats) {
  Timer timer;
  stats.name = "match";
  auto scored = load_scored_tsv(scored_path);
  std::vector<ScoredPair> eligible;
  for (ScoredPair& p : scored)
    if (p.score >= min_score) eligible.push_back(std::move(p));
  auto matches = greedy_match(std::move(eligible));

  AtomicFile file(out_path);
  for (const ScoredPair& p : matches)
    file.stream() << p.src_id << "\t" << p.tgt_id << "\t" << fmt6(p.score)
                  << "\n";
  file.commit();

  stats.counts.emplace_back("matches", matches.size());
  stats.millis = timer.millis();
}

std::vector<std::pair<std::string, std::string>> load_pairs_tsv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open pairs file: " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cols = split_tsv(line);
    if (cols.size() < 2)
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": expected at least 2 columns");
    out.emplace_back(cols[0], cols[1]);
  }
  return out;
}

void stage_extract(const std::string& corpus_path,
                   const std::string& embeddings_path,
                   const std::string& lid_path,
                   const std::string& matches_path, const AlignConfig& align,
                   double lid_default, std::uint32_t threads,
                   const std::string& out_path, StageStats& stats) {
  Timer timer;
  stats.name = "extract";
  auto docs = load_corpus(corpus_path);
  auto counts = sentence_counts(docs);
  auto embs = normalized_embeddings(load_embeddings(embeddings_path, &counts));
  auto lids = load_lid_optional(lid_path, counts);
  std::map<std::string, const Document*> by_id;
  for (const Document& d : docs) by_id[d.doc_id] = &d;

  auto match_rows = load_pairs_tsv(matches_path);
  std::vector<ScoredPair> matches;
  matches.reserve(match_rows.size());
  for (auto& [s, t] : match_rows) matches.push_back(ScoredPair{s, t, 0.0f, 0.0});

  // alignments are recomputed deterministically from the embeddings
  std::vector<Alignment> aligned(matches.size());
  parallel_for(matches.size(), threads, [&](std::size_t i) {
    aligned[i] = align_coarse_to_fine(embs.at(matches[i].src_id),
                                      embs.at(matches[i].tgt_id), align);
  });
  std::map<std::pair<std::string, std::string>, Alignment> alignments;
  for (std::size_t i = 0; i < matches.size(); ++i)
    alignments[{matches[i].src_id, matches[i].tgt_id}] = std::move(aligned[i]);

  std::map<std::string, const std::string*> lang_of;
  for (const Document& d : docs) lang_of[d.doc_id] = &d.lang;

  // score each link against each document's own nominal language
  std::vector<SentencePair> pairs;
  for (const ScoredPair& m : matches) {
    auto chunk =
        extract_sentence_pairs({m}, alignments, embs, lids,
                               *lang_of.at(m.src_id), *lang_of.at(m.tgt_id),
                               lid_default);
    pairs.insert(pairs.end(), chunk.begin(), chunk.end());
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const SentencePair& a, const SentencePair& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.src_id != b.src_id) return a.src_id < b.src_id;
              if (a.src_idx != b.src_idx) return a.src_idx < b.src_idx;
              if (a.tgt_id != b.tgt_id) return a.tgt_id < b.tgt_id;
              return a.tgt_idx < b.tgt_idx;
            });

  AtomicFile file(out_path);
  for (const SentencePair& p : pairs) {
    const Document& sd = *by_id.at(p.src_id);
    const Document& td = *by_id.at(p.tgt_id);
    file.stream() << fmt6(p.score) << "\t"
                  << tsv_safe(sd.sentences.at(p.src_idx)) << "\t"
                  << tsv_safe(td.sentences.at(p.tgt_idx)) << "\n";
  }
  file.commit();

  stats.counts.emplace_back("sentence_pairs", pairs.size());
  stats.millis = timer.millis();
}

PipelineSummary run_pipeline(const PipelineConfig& cfg) {
  if (cfg.out_dir.empty()) throw InputError("run_pipeline: out_dir not set");
  if (cfg.src_lang.empty() || cfg.tgt_lang.empty())
    throw InputError("run_pipeline: src and tgt languages must be set");
  fs::create_directories(cfg.out_dir);

  PipelineSummary summary;
  auto run_stage = [&](const char* name, auto&& fn) {
    StageStats stats;
    try {
      fn(stats);
    } catch (const InputError& e) {
      throw InputError(std::string(name) + ": " + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string(name) + ": " + e.what());
    }
    summary.push_back(std::move(stats));
  };

  const std::string dir = cfg.out_dir + "/";
  std::string emb_path = cfg.embeddings_path;
  bool projected = false;
  run_stage("pca", [&](StageStats& stats) {
    projected = stage_pca(cfg.embeddings_path, cfg.pca_dim, cfg.seed,
                          dir + "pca.bin", dir + "projected.emb", stats);
  });
  if (projected) emb_path = dir + "projected.emb";

  run_stage("docvec", [&](StageStats& stats) {
    stage_docvec(cfg.corpus_path, emb_path, cfg.window, cfg.scheme,
                 projected ? cfg.pca_dim : 0, dir + "docvecs.emb",
                 dir + "docvec_manifest.json", stats);
  });
  run_stage("candidates", [&](StageStats& stats) {
    stage_candidates(cfg.corpus_path, dir + "docvecs.emb", cfg.src_lang,
                     cfg.tgt_lang, cfg.k, cfg.mode, cfg.seed,
                     dir + "candidates.tsv", stats);
  });
  run_stage("align_score", [&](StageStats& stats) {
    stage_align_score(cfg.corpus_path, emb_path, cfg.lid_path,
                      dir + "candidates.tsv", cfg.tgt_lang, cfg.align,
                      cfg.lid_default, cfg.threads, dir + "scored.tsv", stats);
  });
  run_stage("match", [&](StageStats& stats) {
    stage_match(dir + "scored.tsv", cfg.min_match_score, dir + "matches.tsv",
                stats);
  });
  run_stage("extract", [&](StageStats& stats) {
    stage_extract(cfg.corpus_path, emb_path, cfg.lid_path, dir + "matches.tsv",
                  cfg.align, cfg.lid_default, cfg.threads,
                  dir + "sentence_pairs.tsv", stats);
  });
  return summary;
}

}  // namespace docalign
