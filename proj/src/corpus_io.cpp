#include "docalign/corpus_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include <json.hpp>

namespace docalign {

using nlohmann::json;

namespace {

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void write_f32(std::ostream& os, const float* p, std::size_t n) {
  // IEEE-754 float bits, little-endian.
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, p + i, 4);
    unsigned char b[4];
    for (int k = 0; k < 4; ++k)
      b[k] = static_cast<unsigned char>(bits >> (8 * k));
    os.write(reinterpret_cast<const char*>(b), 4);
  }
}

std::uint32_t read_u32(std::istream& is, const std::string& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4))
    throw InputError(path + ": truncated file");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint64_t read_u64(std::istream& is, const std::string& path) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8))
    throw InputError(path + ": truncated file");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

void read_f32(std::istream& is, float* p, std::size_t n,
              const std::string& path) {
  std::vector<unsigned char> buf(n * 4);
  if (!is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(n * 4)))
    throw InputError(path + ": truncated float block");
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits = 0;
    for (int k = 3; k >= 0; --k) bits = (bits << 8) | buf[i * 4 + k];
    std::memcpy(p + i, &bits, 4);
  }
}

void check_magic(std::istream& is, const char* magic,
                 const std::string& path) {
  char buf[4];
  if (!is.read(buf, 4) || std::memcmp(buf, magic, 4) != 0)
    throw InputError(path + ": bad magic, expected \"" + magic + "\"");
}

}  // namespace

std::vector<Document> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open corpus file: " + path);

  std::vector<Document> docs;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": malformed JSON: " + e.what());
    }
    Document d;
    try {
      d.doc_id = j.at("doc_id").get<std::string>();
      d.webdomain = j.at("webdomain").get<std::string>();
      d.lang = j.at("lang").get<std::string>();
      d.sentences = j.at("sentences").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": bad document record: " + e.what());
    }
    if (!seen.insert(d.doc_id).second)
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": duplicate doc_id \"" + d.doc_id + "\"");
    docs.push_back(std::move(d));
  }
  return docs;
}

void store_corpus(const std::vector<Document>& docs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write corpus file: " + path);
  for (const Document& d : docs) {
    json j;
    j["doc_id"] = d.doc_id;
    j["webdomain"] = d.webdomain;
    j["lang"] = d.lang;
    j["sentences"] = d.sentences;
    out << j.dump() << "\n";
  }
  if (!out) throw InputError("write failed: " + path);
}

std::map<std::string, EmbeddingMatrix> load_embeddings(
    const std::string& path,
    const std::map<std::string, std::size_t>* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open embeddings file: " + path);
  check_magic(in, "EMB1", path);
  std::uint32_t dim = read_u32(in, path);
  std::uint64_t count = read_u64(in, path);

  std::map<std::string, EmbeddingMatrix> out;
  for (std::uint64_t r = 0; r < count; ++r) {
    std::uint32_t id_len = read_u32(in, path);
    std::string id(id_len, '\0');
    if (!in.read(id.data(), id_len))
      throw InputError(path + ": truncated doc_id");
    std::uint32_t rows = read_u32(in, path);
    EmbeddingMatrix m;
    m.dim = dim;
    m.data.resize(std::size_t(rows) * dim);
    read_f32(in, m.data.data(), m.data.size(), path);
    for (float v : m.data)
      if (!std::isfinite(v))
        throw InputError(path + ": non-finite value in record \"" + id + "\"");
    if (expected != nullptr) {
      auto it = expected->find(id);
      if (it != expected->end() && it->second != rows)
        throw InputError(path + ": row count mismatch for \"" + id +
                         "\": file has " + std::to_string(rows) +
                         ", corpus has " + std::to_string(it->second));
    }
    if (!out.emplace(std::move(id), std::move(m)).second)
      throw InputError(path + ": duplicate embedding record");
  }
  if (expected != nullptr) {
    for (const auto& [id, n] : *expected) {
      (void)n;
      if (out.find(id) == out.end())
        throw InputError(path + ": missing embeddings for \"" + id + "\"");
    }
  }
  return out;
}

void store_embeddings(const std::map<std::string, EmbeddingMatrix>& data,
                      const std::string& path) {
  std::uint32_t dim = 0;
  bool first = true;
  for (const auto& [id, m] : data) {
    (void)id;
    if (first) {
      dim = m.dim;
      first = false;
    } else if (m.dim != dim) {
      throw InputError("store_embeddings: mixed dims " + std::to_string(dim) +
                       " and " + std::to_string(m.dim));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write embeddings file: " + path);
  out.write("EMB1", 4);
  write_u32(out, dim);
  write_u64(out, data.size());
  for (const auto& [id, m] : data) {
    write_u32(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), std::streamsize(id.size()));
    write_u32(out, static_cast<std::uint32_t>(m.rows()));
    write_f32(out, m.data.data(), m.data.size());
  }
  if (!out) throw InputError("write failed: " + path);
}

std::map<std::string, LidRecord> load_lid(
    const std::string& path,
    const std::map<std::string, std::size_t>* expected) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open LID file: " + path);

  std::map<std::string, LidRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": malformed JSON: " + e.what());
    }
    LidRecord rec;
    try {
      rec.doc_id = j.at("doc_id").get<std::string>();
      for (const auto& entry : j.at("probs")) {
        std::map<std::string, float> m;
        for (auto it = entry.begin(); it != entry.end(); ++it) {
          float p = it.value().get<float>();
          if (!(p >= 0.0f && p <= 1.0f))
            throw InputError(path + ":" + std::to_string(lineno) +
                             ": probability " + std::to_string(p) +
                             " outside [0,1]");
          m[it.key()] = p;
        }
        rec.probs.push_back(std::move(m));
      }
    } catch (const json::exception& e) {
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": bad LID record: " + e.what());
    }
    if (expected != nullptr) {
      auto it = expected->find(rec.doc_id);
      if (it != expected->end() && it->second != rec.probs.size())
        throw InputError(path + ":" + std::to_string(lineno) +
                         ": sentence count mismatch for \"" + rec.doc_id +
                         "\": file has " + std::to_string(rec.probs.size()) +
                         ", corpus has " + std::to_string(it->second));
    }
    std::string id = rec.doc_id;
    if (!out.emplace(std::move(id), std::move(rec)).second)
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": duplicate doc_id");
  }
  return out;
}

void store_lid(const std::map<std::string, LidRecord>& data,
               const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write LID file: " + path);
  for (const auto& [id, rec] : data) {
    json probs = json::array();
    for (const auto& m : rec.probs) {
      json e = json::object();
      for (const auto& [lang, p] : m) e[lang] = p;
      probs.push_back(std::move(e));
    }
    json j;
    j["doc_id"] = id;
    j["probs"] = std::move(probs);
    out << j.dump() << "\n";
  }
  if (!out) throw InputError("write failed: " + path);
}

PcaModel load_pca_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open PCA model: " + path);
  check_magic(in, "PCA1", path);
  PcaModel model;
  model.input_dim = read_u32(in, path);
  model.output_dim = read_u32(in, path);
  if (model.output_dim > model.input_dim)
    throw InputError(path + ": output_dim exceeds input_dim");
  model.mean.resize(model.input_dim);
  read_f32(in, model.mean.data(), model.mean.size(), path);
  model.components.resize(std::size_t(model.output_dim) * model.input_dim);
  read_f32(in, model.components.data(), model.components.size(), path);
  return model;
}

void store_pca_model(const PcaModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write PCA model: " + path);
  out.write("PCA1", 4);
  write_u32(out, model.input_dim);
  write_u32(out, model.output_dim);
  write_f32(out, model.mean.data(), model.mean.size());
  write_f32(out, model.components.data(), model.components.size());
  if (!out) throw InputError("write failed: " + path);
}

std::map<std::string, std::size_t> sentence_counts(
    const std::vector<Document>& docs) {
  std::map<std::string, std::size_t> out;
  for (const Document& d : docs) out[d.doc_id] = d.size();
  return out;
}

}  // namespace docalign
