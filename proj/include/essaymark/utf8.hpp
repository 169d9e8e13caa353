#ifndef ESSAYMARK_UTF8_HPP
#define ESSAYMARK_UTF8_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace essaymark::utf8 {

struct DecodeError : std::runtime_error {
  std::size_t byte_offset;
  explicit DecodeError(std::size_t off)
      : std::runtime_error("invalid UTF-8 at byte " + std::to_string(off)),
        byte_offset(off) {}
};

// Decodes UTF-8 into Unicode scalar values. Throws DecodeError on malformed
// input (overlong forms, surrogates, truncated sequences).
std::u32string decode(std::string_view s);

std::string encode(std::u32string_view s);
std::string encode(char32_t c);

// Number of Unicode scalar values in s.
std::size_t length(std::string_view s);

}  // namespace essaymark::utf8

#endif
