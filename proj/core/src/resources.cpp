#include "secmt/resources.hpp"

#include <cstdlib>
#include <fstream>

#include "secmt/text.hpp"

namespace secmt {

namespace fs = std::filesystem;

fs::path data_dir() {
  if (const char* env = std::getenv("SECMT_DATA_DIR"); env && *env) {
    return fs::path(env);
  }
  const fs::path build_tree(SECMT_BUILD_DATA_DIR);
  if (fs::is_directory(build_tree)) return build_tree;
  return fs::path(SECMT_INSTALL_DATA_DIR);
}

std::vector<std::string> load_word_list(const fs::path& path) {
  std::vector<std::string> words;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    const auto word = text::trim(line);
    if (word.empty() || word.front() == '#') continue;
    words.emplace_back(word);
  }
  return words;
}

namespace {

WordSet load_set(std::string_view kind, std::string_view lang) {
  const auto path = data_dir() / kind / (std::string(lang) + ".txt");
  WordSet set;
  for (auto& w : load_word_list(path)) set.insert(text::to_lower(w));
  return set;
}

}  // namespace

WordSet stopwords(std::string_view lang) { return load_set("stopwords", lang); }

WordSet abbreviations(std::string_view lang) {
  return load_set("abbreviations", lang);
}

WordSet retained_exceptions(std::string_view lang) {
  return load_set("exceptions", lang);
}

std::vector<std::string> default_biography_keywords() {
  return {"person", "writer", "politician", "player",
          "actor",  "singer", "births",     "deaths"};
}

}  // namespace secmt
