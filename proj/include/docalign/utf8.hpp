#ifndef DOCALIGN_UTF8_HPP
#define DOCALIGN_UTF8_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace docalign {

// Decodes UTF-8 into code points. Invalid bytes are passed through as
// single code points so malformed web text never aborts the pipeline.
std::vector<std::uint32_t> utf8_decode(std::string_view s);

std::string utf8_encode(const std::vector<std::uint32_t>& cps);

// Number of Unicode scalar values in s.
std::size_t utf8_length(std::string_view s);

bool is_unicode_space(std::uint32_t cp);

// Collapses runs of Unicode whitespace to single ASCII spaces and trims
// both ends. Used as the sentence key for document-frequency counting.
std::string collapse_whitespace(std::string_view s);

}  // namespace docalign

#endif  // DOCALIGN_UTF8_HPP
