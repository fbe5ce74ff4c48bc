#include "docalign/docvec.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "docalign/utf8.hpp"
#include "docalign/vecmath.hpp"

namespace docalign {

BoilerplateScheme parse_scheme(const std::string& name) {
  if (name == "idf") return BoilerplateScheme::IDF;
  if (name == "lidf") return BoilerplateScheme::LIDF;
  if (name == "length") return BoilerplateScheme::LENGTH;
  if (name == "none") return BoilerplateScheme::NONE;
  throw InputError("unknown boilerplate scheme: " + name);
}

std::string scheme_name(BoilerplateScheme scheme) {
  switch (scheme) {
    case BoilerplateScheme::IDF: return "idf";
    case BoilerplateScheme::LIDF: return "lidf";
    case BoilerplateScheme::LENGTH: return "length";
    case BoilerplateScheme::NONE: return "none";
  }
  return "none";
}

std::vector<std::vector<double>> pert_window_weights(std::size_t n_sentences,
                                                     const WindowConfig& cfg) {
  if (n_sentences == 0)
    throw InputError("pert_window_weights: empty document");
  if (cfg.windows < 1) throw InputError("window count must be >= 1");
  if (!(cfg.gamma > 0.0)) throw InputError("gamma must be > 0");

  const double n = double(n_sentences);
  const std::uint32_t j_count = cfg.windows;
  std::vector<std::vector<double>> rows(j_count,
                                        std::vector<double>(n_sentences));
  for (std::uint32_t j = 0; j < j_count; ++j) {
    const double mode = (double(j) + 0.5) / double(j_count) * n;
    const double alpha = 1.0 + cfg.gamma * mode / n;
    const double beta = 1.0 + cfg.gamma * (n - mode) / n;
    // log-space evaluation; x = s+0.5 lies strictly inside (0, N)
    std::vector<double>& row = rows[j];
    double max_log = -HUGE_VAL;
    for (std::size_t s = 0; s < n_sentences; ++s) {
      double x = double(s) + 0.5;
      double lf = (alpha - 1.0) * std::log(x) + (beta - 1.0) * std::log(n - x);
      row[s] = lf;
      max_log = std::max(max_log, lf);
    }
    double sum = 0.0;
    for (double& v : row) {
      v = std::exp(v - max_log);
      sum += v;
    }
    for (double& v : row) v /= sum;
  }
  return rows;
}

BoilerplateTable build_boilerplate_table(std::span<const Document> docs) {
  BoilerplateTable table;
  for (const Document& doc : docs) {
    std::set<std::string> keys;
    for (const std::string& s : doc.sentences)
      keys.insert(collapse_whitespace(s));
    for (const std::string& k : keys) ++table.df[k];
  }
  return table;
}

double boilerplate_weight(const std::string& sentence,
                          const BoilerplateTable& table,
                          BoilerplateScheme scheme) {
  switch (scheme) {
    case BoilerplateScheme::NONE:
      return 1.0;
    case BoilerplateScheme::LENGTH:
      return double(utf8_length(sentence));
    case BoilerplateScheme::IDF:
    case BoilerplateScheme::LIDF: {
      auto it = table.df.find(collapse_whitespace(sentence));
      if (it == table.df.end())
        throw InputError("boilerplate_weight: sentence not in table: \"" +
                         sentence + "\"");
      double df = double(it->second);
      return scheme == BoilerplateScheme::IDF ? 1.0 / (1.0 + std::log(df))
                                              : 1.0 / df;
    }
  }
  return 1.0;
}

std::vector<std::vector<float>> build_subvectors(
    const EmbeddingMatrix& emb,
    const std::vector<std::vector<double>>& windows,
    const std::vector<double>& bweights) {
  const std::size_t n = emb.rows();
  if (bweights.size() != n)
    throw InputError("build_subvectors: boilerplate weight count mismatch");
  for (const auto& row : windows)
    if (row.size() != n)
      throw InputError("build_subvectors: window row length mismatch");

  std::vector<std::vector<float>> out;
  out.reserve(windows.size());
  std::vector<double> acc(emb.dim);
  for (const auto& window : windows) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      const double w = window[s] * bweights[s];
      if (w == 0.0) continue;
      const float* row = emb.row(s);
      for (std::uint32_t d = 0; d < emb.dim; ++d) acc[d] += w * double(row[d]);
    }
    std::vector<float> v(emb.dim);
    for (std::uint32_t d = 0; d < emb.dim; ++d)
      v[d] = static_cast<float>(acc[d]);
    out.push_back(std::move(v));
  }
  return out;
}

namespace {

std::vector<double> doc_bweights(const Document& doc,
                                 const BoilerplateTable& table,
                                 BoilerplateScheme scheme) {
  std::vector<double> w(doc.size());
  for (std::size_t s = 0; s < doc.size(); ++s)
    w[s] = boilerplate_weight(doc.sentences[s], table, scheme);
  return w;
}

DocVector concat_normalized(std::vector<std::vector<float>> subvectors,
                            std::uint32_t dim) {
  DocVector v;
  v.sub_dim = dim;
  v.windows = static_cast<std::uint32_t>(subvectors.size());
  v.data.reserve(std::size_t(v.windows) * dim);
  for (auto& sub : subvectors) {
    unit_normalize_inplace(sub);
    v.data.insert(v.data.end(), sub.begin(), sub.end());
  }
  return v;
}

}  // namespace

DocVector build_docvector(const Document& doc, const EmbeddingMatrix& emb,
                          const BoilerplateTable& table,
                          BoilerplateScheme scheme, const WindowConfig& cfg) {
  if (doc.size() == 0)
    throw InputError("build_docvector: empty document \"" + doc.doc_id + "\"");
  if (emb.rows() != doc.size())
    throw InputError("build_docvector: embedding rows do not match \"" +
                     doc.doc_id + "\"");
  auto windows = pert_window_weights(doc.size(), cfg);
  auto bweights = doc_bweights(doc, table, scheme);
  return concat_normalized(build_subvectors(emb, windows, bweights), emb.dim);
}

DocVector baseline_avg_docvector(const Document& doc,
                                 const EmbeddingMatrix& emb,
                                 const BoilerplateTable& table,
                                 BoilerplateScheme scheme) {
  if (doc.size() == 0)
    throw InputError("baseline_avg_docvector: empty document \"" + doc.doc_id +
                     "\"");
  if (emb.rows() != doc.size())
    throw InputError("baseline_avg_docvector: embedding rows do not match \"" +
                     doc.doc_id + "\"");
  std::vector<std::vector<double>> uniform(
      1, std::vector<double>(doc.size(), 1.0));
  auto bweights = doc_bweights(doc, table, scheme);
  return concat_normalized(build_subvectors(emb, uniform, bweights), emb.dim);
}

}  // namespace docalign
