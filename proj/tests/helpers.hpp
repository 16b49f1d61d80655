#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "secmt/corpus.hpp"
#include "secmt/text.hpp"

namespace testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(SECMT_TEST_DATA) / name;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline secmt::Sentence sentence(const std::string& text, const std::string& doc = "d",
                                std::size_t section = 0, std::size_t index = 0) {
  secmt::Sentence s;
  s.text = text;
  s.tokens = secmt::text::split_whitespace(text);
  s.doc_id = doc;
  s.section_index = section;
  s.sentence_index = index;
  return s;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("secmt_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
