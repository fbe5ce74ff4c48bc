#include "docalign/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <Eigen/Dense>

#include "docalign/corpus_io.hpp"
#include "docalign/vecmath.hpp"

namespace docalign {

namespace {

// Distribution implementations are pinned here rather than taken from
// <random> so outputs stay identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {  // [0, 1)
    return double(engine_() >> 11) * 0x1.0p-53;
  }

  std::size_t uniform_int(std::size_t lo, std::size_t hi) {  // inclusive
    return lo + std::size_t(uniform() * double(hi - lo + 1));
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[uniform_int(0, i - 1)]);
  }

  std::string hex_token(std::size_t n_chars) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (std::size_t i = 0; i < n_chars; ++i)
      out.push_back(digits[uniform_int(0, 15)]);
    return out;
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

Eigen::MatrixXd random_rotation(std::uint32_t dim, Rng& rng) {
  Eigen::MatrixXd a(dim, dim);
  for (std::uint32_t i = 0; i < dim; ++i)
    for (std::uint32_t j = 0; j < dim; ++j) a(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd diag = qr.matrixQR().diagonal();
  for (std::uint32_t j = 0; j < dim; ++j)
    if (diag(j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

std::vector<float> random_unit_row(std::uint32_t dim, Rng& rng) {
  std::vector<float> row(dim);
  double norm2 = 0.0;
  for (std::uint32_t d = 0; d < dim; ++d) {
    double g = rng.gaussian();
    row[d] = static_cast<float>(g);
    norm2 += g * g;
  }
  double norm = std::sqrt(norm2);
  if (norm > 0.0)
    for (float& x : row) x = static_cast<float>(double(x) / norm);
  return row;
}

std::string zero_pad(std::size_t v, int width) {
  std::string s = std::to_string(v);
  while (int(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

struct BoilerplatePool {
  std::vector<std::string> texts;
  std::vector<std::vector<float>> rows;
};

BoilerplatePool make_pool(const std::string& lang, std::uint32_t dim,
                          Rng& rng) {
  BoilerplatePool pool;
  for (int k = 0; k < 3; ++k) {
    pool.texts.push_back("shared navigation text " + std::to_string(k) +
                         " [" + lang + "]");
    pool.rows.push_back(random_unit_row(dim, rng));
  }
  return pool;
}

// Inserts round(rate * N) shared rows at random positions.
void inject_boilerplate(Document& doc, EmbeddingMatrix& emb,
                        const BoilerplatePool& pool, double rate, Rng& rng) {
  if (rate <= 0.0) return;
  std::size_t count = std::size_t(std::llround(rate * double(doc.size())));
  for (std::size_t k = 0; k < count; ++k) {
    std::size_t pos = rng.uniform_int(0, doc.size());
    std::size_t which = k % pool.texts.size();
    doc.sentences.insert(doc.sentences.begin() + std::ptrdiff_t(pos),
                         pool.texts[which]);
    const std::vector<float>& row = pool.rows[which];
    emb.data.insert(emb.data.begin() + std::ptrdiff_t(pos * emb.dim),
                    row.begin(), row.end());
  }
}

LidRecord nominal_lid(const Document& doc) {
  LidRecord rec;
  rec.doc_id = doc.doc_id;
  rec.probs.assign(doc.size(), {{doc.lang, 1.0f}});
  return rec;
}

}  // namespace

SynthCorpus synth_corpus(const SynthSpec& spec) {
  if (spec.dim < 8) throw InputError("synth_corpus: dim must be >= 8");
  if (spec.noise_sigma < 0.0)
    throw InputError("synth_corpus: noise_sigma must be >= 0");
  if (spec.sent_min < 1 || spec.sent_max < spec.sent_min)
    throw InputError("synth_corpus: bad sentence range");

  Rng rng(spec.seed);
  Eigen::MatrixXd rotation = random_rotation(spec.dim, rng);
  BoilerplatePool src_pool = make_pool(spec.src_lang, spec.dim, rng);
  BoilerplatePool tgt_pool = make_pool(spec.tgt_lang, spec.dim, rng);

  SynthCorpus out;
  auto add_doc = [&](Document doc, EmbeddingMatrix emb) {
    out.lids[doc.doc_id] = nominal_lid(doc);
    out.embeddings[doc.doc_id] = std::move(emb);
    out.docs.push_back(std::move(doc));
  };
  auto content_sentence = [&](const std::string& doc_id, std::size_t idx,
                              const std::string& token) {
    return doc_id + " " + token + " sentence " + std::to_string(idx);
  };

  std::vector<std::pair<Document, EmbeddingMatrix>> shuffled_copies;
  Eigen::VectorXd latent(spec.dim), rotated(spec.dim);

  for (std::size_t p = 0; p < spec.n_pairs; ++p) {
    const std::size_t n = rng.uniform_int(spec.sent_min, spec.sent_max);
    const std::string src_id = spec.src_lang + "_" + zero_pad(p, 5);
    const std::string tgt_id = spec.tgt_lang + "_" + zero_pad(p, 5);
    const std::string src_token = rng.hex_token(8);
    const std::string tgt_token = rng.hex_token(8);

    Document src{src_id, spec.webdomain, spec.src_lang, {}};
    Document tgt{tgt_id, spec.webdomain, spec.tgt_lang, {}};
    EmbeddingMatrix src_emb{spec.dim, {}};
    EmbeddingMatrix tgt_emb{spec.dim, {}};
    for (std::size_t s = 0; s < n; ++s) {
      std::vector<float> z = random_unit_row(spec.dim, rng);
      for (std::uint32_t d = 0; d < spec.dim; ++d) latent(d) = z[d];
      rotated = rotation * latent;
      for (std::uint32_t d = 0; d < spec.dim; ++d)
        src_emb.data.push_back(static_cast<float>(rotated(d)));

      std::vector<float> noisy(spec.dim);
      for (std::uint32_t d = 0; d < spec.dim; ++d)
        noisy[d] = static_cast<float>(rotated(d) +
                                      spec.noise_sigma * rng.gaussian());
      unit_normalize_inplace(noisy);
      tgt_emb.data.insert(tgt_emb.data.end(), noisy.begin(), noisy.end());

      src.sentences.push_back(content_sentence(src_id, s, src_token));
      tgt.sentences.push_back(content_sentence(tgt_id, s, tgt_token));
    }
    inject_boilerplate(src, src_emb, src_pool, spec.boilerplate_rate, rng);
    inject_boilerplate(tgt, tgt_emb, tgt_pool, spec.boilerplate_rate, rng);

    if (spec.shuffle_distractors) {
      Document copy = tgt;
      copy.doc_id = spec.tgt_lang + "_s" + zero_pad(p, 5);
      EmbeddingMatrix copy_emb = tgt_emb;
      std::vector<std::size_t> perm(copy.size());
      for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
      rng.shuffle(perm);
      for (std::size_t i = 0; i < perm.size(); ++i) {
        copy.sentences[i] = tgt.sentences[perm[i]];
        std::copy(tgt_emb.row(perm[i]), tgt_emb.row(perm[i]) + spec.dim,
                  copy_emb.row(i));
      }
      shuffled_copies.emplace_back(std::move(copy), std::move(copy_emb));
    }

    out.gold.emplace(src_id, tgt_id);
    add_doc(std::move(src), std::move(src_emb));
    add_doc(std::move(tgt), std::move(tgt_emb));
  }

  // unrelated source-side documents, as on real crawls where most source
  // documents have no translation
  for (std::size_t u = 0; u < spec.n_distractors; ++u) {
    const std::size_t n = rng.uniform_int(spec.sent_min, spec.sent_max);
    const std::string id = spec.src_lang + "_u" + zero_pad(u, 5);
    const std::string token = rng.hex_token(8);
    Document doc{id, spec.webdomain, spec.src_lang, {}};
    EmbeddingMatrix emb{spec.dim, {}};
    for (std::size_t s = 0; s < n; ++s) {
      std::vector<float> row = random_unit_row(spec.dim, rng);
      emb.data.insert(emb.data.end(), row.begin(), row.end());
      doc.sentences.push_back(content_sentence(id, s, token));
    }
    inject_boilerplate(doc, emb, src_pool, spec.boilerplate_rate, rng);
    add_doc(std::move(doc), std::move(emb));
  }

  for (auto& [doc, emb] : shuffled_copies) add_doc(std::move(doc), std::move(emb));
  return out;
}

void write_synth_corpus(const SynthCorpus& corpus, const std::string& dir) {
  std::filesystem::create_directories(dir);
  store_corpus(corpus.docs, dir + "/corpus.jsonl");
  store_embeddings(corpus.embeddings, dir + "/embeddings.emb");
  store_lid(corpus.lids, dir + "/lid.jsonl");
  std::ofstream gold(dir + "/gold.tsv", std::ios::binary);
  if (!gold) throw InputError("cannot write gold pairs: " + dir + "/gold.tsv");
  for (const auto& [s, t] : corpus.gold) gold << s << "\t" << t << "\n";
}

}  // namespace docalign
