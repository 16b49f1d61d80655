#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "secmt/corpus.hpp"

// Synthetic bilingual biography corpus. Target text is English-like, the
// source side replaces every content word with a letter-substitution cipher
// and every function word with a French one, so a word lexicon links the two.
namespace secmt::synth {

struct SynthOptions {
  std::size_t biographies = 40;
  std::size_t other_documents = 4;
  std::size_t min_sections = 3;
  std::size_t max_sections = 5;
  std::size_t min_sentences = 2;
  std::size_t max_sentences = 4;
  double noise_rate = 0.08;  // extra source sentence with no translation
  double merge_rate = 0.05;  // two target sentences written as one
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthCorpus {
  std::vector<RawDocument> source;
  std::vector<RawDocument> target;
  std::vector<std::pair<std::string, std::string>> lexicon;  // source, target
  // Generator topic of every section (lead section included), per document.
  std::vector<std::vector<std::size_t>> section_topics;
};

std::size_t topic_count();
const std::vector<std::string>& topic_words(std::size_t topic);
std::string encipher(std::string_view word);

SynthCorpus generate(const SynthOptions& options);

void write_lexicon(std::ostream& out,
                   const std::vector<std::pair<std::string, std::string>>& lexicon);

}  // namespace secmt::synth
