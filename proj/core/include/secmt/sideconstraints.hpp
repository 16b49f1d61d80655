#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "secmt/corpus.hpp"
#include "secmt/topics.hpp"

namespace secmt::sideconstraints {

struct TaggedSentence {
  std::size_t topic = 0;
  std::string text;  // "<topicN> " + original text
};

// "<topicN>"
std::string topic_tag(std::size_t topic);

TaggedSentence tag_sentence(const Sentence& sentence, std::size_t topic);
TaggedSentence tag_sentence(std::string_view text, std::size_t topic);

struct Untagged {
  std::optional<std::size_t> topic;
  std::string text;
};

// Recognises a canonical leading tag followed by one space; anything else
// is returned unchanged with no topic.
Untagged untag(std::string_view text);

struct TaggingOptions {
  topics::Granularity granularity = topics::Granularity::section;
  std::size_t infer_iterations = 100;
  std::uint64_t seed = 1;
  WordSet stopwords;
};

struct TaggingResult {
  std::vector<TaggedSentence> sentences;  // corpus order
  StructuredCorpus corpus;                // same corpus with tagged text/tokens
  std::vector<std::string> warnings;
};

// Every sentence is tagged with the dominant topic of its unit. Units whose
// bag has no known word get topic 0 and a warning.
TaggingResult tag_corpus(const StructuredCorpus& corpus,
                         const topics::TopicModel& model,
                         const TaggingOptions& options);

// Topic per unit key, as computed by tag_corpus.
std::vector<std::pair<topics::UnitId, std::size_t>> unit_topics(
    const StructuredCorpus& corpus, const topics::TopicModel& model,
    const TaggingOptions& options, std::vector<std::string>* warnings = nullptr);

}  // namespace secmt::sideconstraints
