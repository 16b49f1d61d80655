#include "secmt/sideconstraints.hpp"

#include <map>

#include "secmt/error.hpp"

namespace secmt::sideconstraints {

std::string topic_tag(std::size_t topic) {
  return "<topic" + std::to_string(topic) + ">";
}

TaggedSentence tag_sentence(std::string_view text, std::size_t topic) {
  std::string tagged = topic_tag(topic);
  tagged += ' ';
  tagged += text;
  return {topic, std::move(tagged)};
}

TaggedSentence tag_sentence(const Sentence& sentence, std::size_t topic) {
  return tag_sentence(sentence.text, topic);
}

Untagged untag(std::string_view text) {
  constexpr std::string_view kOpen = "<topic";
  constexpr std::size_t kMaxDigits = 9;
  Untagged none{std::nullopt, std::string(text)};
  if (text.substr(0, kOpen.size()) != kOpen) return none;
  std::size_t i = kOpen.size();
  std::size_t topic = 0;
  const std::size_t digits_begin = i;
  while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
    topic = topic * 10 + static_cast<std::size_t>(text[i] - '0');
    ++i;
  }
  const std::size_t digits = i - digits_begin;
  if (digits == 0 || digits > kMaxDigits) return none;
  if (digits > 1 && text[digits_begin] == '0') return none;  // not canonical
  if (text.substr(i, 2) != "> ") return none;
  return {topic, std::string(text.substr(i + 2))};
}

std::vector<std::pair<topics::UnitId, std::size_t>> unit_topics(
    const StructuredCorpus& corpus, const topics::TopicModel& model,
    const TaggingOptions& options, std::vector<std::string>* warnings) {
  if (model.config.granularity != options.granularity) {
    fail(ErrorKind::config,
         "topic model granularity (" +
             std::string(topics::to_string(model.config.granularity)) +
             ") does not match tagging granularity (" +
             std::string(topics::to_string(options.granularity)) + ")");
  }
  std::vector<std::pair<topics::UnitId, std::size_t>> out;
  for (const auto& unit : topics::prepare_units(corpus, options.granularity,
                                                options.stopwords, true)) {
    const auto dist = topics::infer_topics(model, unit, options.infer_iterations,
                                           topics::unit_seed(options.seed, unit.id));
    if (dist.uninformative && warnings) {
      warnings->push_back("unit " + unit.id.key() +
                          " has no known words; tagged with topic 0");
    }
    out.emplace_back(unit.id, topics::dominant_topic(dist.probs));
  }
  return out;
}

TaggingResult tag_corpus(const StructuredCorpus& corpus,
                         const topics::TopicModel& model,
                         const TaggingOptions& options) {
  TaggingResult result;
  std::map<topics::UnitId, std::size_t> topic_of;
  for (auto& [id, topic] : unit_topics(corpus, model, options, &result.warnings)) {
    topic_of[id] = topic;
  }
  result.corpus = corpus;
  for (auto& doc : result.corpus) {
    for (auto& section : doc.sections) {
      for (auto& sentence : section.sentences) {
        const auto it = topic_of.find(topics::unit_of(sentence, options.granularity));
        const std::size_t topic = it == topic_of.end() ? 0 : it->second;
        auto tagged = tag_sentence(sentence, topic);
        sentence.text = tagged.text;
        sentence.tokens.insert(sentence.tokens.begin(), topic_tag(topic));
        result.sentences.push_back(std::move(tagged));
      }
    }
  }
  return result;
}

}  // namespace secmt::sideconstraints
