#ifndef DOCALIGN_TYPES_HPP
#define DOCALIGN_TYPES_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace docalign {

// Bad or inconsistent user input (malformed files, dimension mismatches...).
// The CLI maps this to exit code 1; anything else is an internal error (2).
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// One web document: an ordered list of sentences plus identifying metadata.
struct Document {
  std::string doc_id;
  std::string webdomain;
  std::string lang;
  std::vector<std::string> sentences;

  std::size_t size() const { return sentences.size(); }
};

// Row-major matrix of 32-bit floats, one row per sentence.
struct EmbeddingMatrix {
  std::uint32_t dim = 0;
  std::vector<float> data;

  std::size_t rows() const { return dim == 0 ? 0 : data.size() / dim; }
  const float* row(std::size_t i) const { return data.data() + i * dim; }
  float* row(std::size_t i) { return data.data() + i * dim; }
};

// Per-sentence language -> probability maps for one document.
struct LidRecord {
  std::string doc_id;
  std::vector<std::map<std::string, float>> probs;
};

// Probability that sentence `sent` of `rec` is in language `lang`.
// A missing record, sentence entry, or language key yields `fallback`
// (absence of LID evidence must not zero out a pair).
inline double lid_prob(const LidRecord* rec, std::size_t sent,
                       const std::string& lang, double fallback = 1.0) {
  if (rec == nullptr || sent >= rec->probs.size()) return fallback;
  auto it = rec->probs[sent].find(lang);
  return it == rec->probs[sent].end() ? fallback : it->second;
}

}  // namespace docalign

#endif  // DOCALIGN_TYPES_HPP
