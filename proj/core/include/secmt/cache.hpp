#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "secmt/bpe.hpp"
#include "secmt/resources.hpp"
#include "secmt/topics.hpp"

namespace secmt::cache {

// Decides which words count as content words for the dynamic cache.
// Words are compared lowercased; punctuation-only tokens count as
// stopwords. Retained exceptions (pronouns, tense-bearing auxiliaries)
// pass even though they are function words.
class StopwordFilter {
 public:
  StopwordFilter() = default;
  StopwordFilter(WordSet stopwords, WordSet retained_exceptions);

  static StopwordFilter for_language(std::string_view lang);

  bool passes(std::string_view word) const;

 private:
  WordSet stopwords_;
  WordSet retained_;
};

struct TopicCache {
  std::vector<std::string> entries;
  std::size_t capacity = 100;
  std::size_t topic = 0;

  bool operator==(const TopicCache&) const = default;
};

// Insertion-ordered, duplicate-free, oldest entries evicted first.
struct DynamicCache {
  std::vector<std::string> entries;
  std::size_t capacity = 100;

  bool contains(std::string_view token) const;
  bool operator==(const DynamicCache&) const = default;
};

struct CacheState {
  TopicCache topic_cache;
  DynamicCache dynamic_cache;
  std::string unit_id;
};

// Walks the topic's words from most to least probable, BPE-segments each
// and appends subwords not already present until capacity is reached.
TopicCache load_topic_cache(const topics::TopicModel& model, std::size_t topic,
                            std::size_t capacity, const bpe::Segmenter& segmenter);
TopicCache load_topic_cache(const topics::TopicModel& model, std::size_t topic,
                            std::size_t capacity, const bpe::MergeTable& merges);

// Adds the subwords of every content word of one completed sentence.
// sentence_tokens are BPE subwords; words are regrouped with the marker
// before filtering.
DynamicCache update_dynamic(DynamicCache cache,
                            std::span<const std::string> sentence_tokens,
                            const StopwordFilter& filter,
                            std::string_view marker = "@@");

struct CacheDeps {
  const topics::TopicModel* model = nullptr;
  const bpe::Segmenter* segmenter = nullptr;
  std::size_t topic_capacity = 100;
  std::size_t dynamic_capacity = 100;
};

// Empties the dynamic cache and reloads the topic cache for a new unit.
CacheState reset_for_unit(const CacheState& state, std::string unit_id,
                          std::size_t topic, const CacheDeps& deps);

// Topic entries, then dynamic entries not already in the topic cache.
std::vector<std::string> cache_words(const CacheState& state);

// One decoding session: the caches follow the units being translated and
// only ever see completed sentences.
class CacheSession {
 public:
  CacheSession(CacheDeps deps, StopwordFilter filter);

  // Starts decoding a sentence of the given unit, resetting the caches when
  // the unit changes.
  void begin_sentence(const std::string& unit_id, std::size_t topic);
  // Words available while decoding the current sentence.
  std::vector<std::string> words() const { return cache_words(state_); }
  // Feeds the finished sentence (reference or hypothesis) to the dynamic cache.
  void complete_sentence(std::span<const std::string> tokens);

  const CacheState& state() const { return state_; }
  std::size_t resets() const { return resets_; }

 private:
  const TopicCache& topic_cache_for(std::size_t topic);

  CacheDeps deps_;
  StopwordFilter filter_;
  CacheState state_;
  std::map<std::size_t, TopicCache> loaded_;
  std::size_t resets_ = 0;
  bool started_ = false;
  bool in_sentence_ = false;
};

// Debug dump: one JSON object per line with unit_id, topic_id,
// topic_entries and dynamic_entries.
void write_snapshot(std::ostream& out, const CacheState& state);

}  // namespace secmt::cache
