#pragma once

#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers shared by the tokenizers, the sentence splitter and BPE.
namespace secmt::text {

// Invalid byte sequences decode to U+FFFD.
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view codepoints);
void append_utf8(std::string& out, char32_t cp);

// Splits into one string per code point.
std::vector<std::string> utf8_chars(std::string_view bytes);

// Simple case folding for Latin, Greek, Cyrillic and fullwidth Latin.
// Scripts without case pass through unchanged.
char32_t fold_case(char32_t cp) noexcept;
std::string to_lower(std::string_view s);

// Whitespace as understood by Python's str.split().
bool is_space(char32_t cp) noexcept;
bool is_punctuation(char32_t cp) noexcept;
bool is_punctuation_token(std::string_view token);

std::string_view trim(std::string_view s) noexcept;
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
// Collapses any whitespace run to one ASCII space and trims the ends.
std::string normalize_whitespace(std::string_view s);

bool iequals(std::string_view a, std::string_view b);

}  // namespace secmt::text
