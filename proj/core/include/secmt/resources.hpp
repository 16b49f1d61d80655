#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace secmt {

using WordSet = std::unordered_set<std::string>;

// Root of the shipped word lists. SECMT_DATA_DIR overrides; otherwise the
// source-tree copy is used when present, then the installed copy.
std::filesystem::path data_dir();

// One entry per line; blank lines and lines starting with '#' are skipped.
std::vector<std::string> load_word_list(const std::filesystem::path& path);

// Per-language lists; an unknown language yields an empty set.
WordSet stopwords(std::string_view lang);
WordSet abbreviations(std::string_view lang);
WordSet retained_exceptions(std::string_view lang);

std::vector<std::string> default_biography_keywords();

}  // namespace secmt
