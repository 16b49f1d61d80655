#include "secmt/cache.hpp"

#include <algorithm>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "secmt/error.hpp"
#include "secmt/text.hpp"

namespace secmt::cache {

StopwordFilter::StopwordFilter(WordSet stopwords, WordSet retained_exceptions)
    : stopwords_(std::move(stopwords)), retained_(std::move(retained_exceptions)) {}

StopwordFilter StopwordFilter::for_language(std::string_view lang) {
  return StopwordFilter(stopwords(lang), retained_exceptions(lang));
}

bool StopwordFilter::passes(std::string_view word) const {
  const auto lowered = text::to_lower(word);
  if (retained_.count(lowered)) return true;
  if (text::is_punctuation_token(word)) return false;
  return stopwords_.count(lowered) == 0;
}

bool DynamicCache::contains(std::string_view token) const {
  return std::find(entries.begin(), entries.end(), token) != entries.end();
}

TopicCache load_topic_cache(const topics::TopicModel& model, std::size_t topic,
                            std::size_t capacity, const bpe::Segmenter& segmenter) {
  if (capacity < 1) fail(ErrorKind::config, "topic cache capacity must be >= 1");
  TopicCache cache;
  cache.capacity = capacity;
  cache.topic = topic;
  std::unordered_set<std::string> present;
  for (const auto& ranked : topics::top_words(model, topic, model.vocab_size())) {
    for (auto& piece : segmenter.segment(ranked.word)) {
      if (cache.entries.size() == capacity) return cache;
      if (present.insert(piece).second) cache.entries.push_back(std::move(piece));
    }
    if (cache.entries.size() == capacity) break;
  }
  return cache;
}

TopicCache load_topic_cache(const topics::TopicModel& model, std::size_t topic,
                            std::size_t capacity, const bpe::MergeTable& merges) {
  return load_topic_cache(model, topic, capacity, bpe::Segmenter(merges));
}

DynamicCache update_dynamic(DynamicCache cache,
                            std::span<const std::string> sentence_tokens,
                            const StopwordFilter& filter, std::string_view marker) {
  if (cache.capacity < 1) fail(ErrorKind::config, "dynamic cache capacity must be >= 1");
  for (const auto& pieces : bpe::group_words(sentence_tokens, marker)) {
    if (!filter.passes(bpe::undo_bpe(pieces, marker))) continue;
    for (const auto& piece : pieces) {
      if (!cache.contains(piece)) cache.entries.push_back(piece);
    }
  }
  if (cache.entries.size() > cache.capacity) {
    const auto excess = static_cast<std::ptrdiff_t>(cache.entries.size() - cache.capacity);
    cache.entries.erase(cache.entries.begin(), cache.entries.begin() + excess);
  }
  return cache;
}

CacheState reset_for_unit(const CacheState& state, std::string unit_id,
                          std::size_t topic, const CacheDeps& deps) {
  if (!deps.model || !deps.segmenter) {
    fail(ErrorKind::invariant, "cache reset without a topic model and segmenter");
  }
  CacheState next;
  next.unit_id = std::move(unit_id);
  next.topic_cache =
      load_topic_cache(*deps.model, topic, deps.topic_capacity, *deps.segmenter);
  next.dynamic_cache.capacity =
      deps.dynamic_capacity ? deps.dynamic_capacity : state.dynamic_cache.capacity;
  return next;
}

std::vector<std::string> cache_words(const CacheState& state) {
  std::vector<std::string> words = state.topic_cache.entries;
  std::unordered_set<std::string> present(words.begin(), words.end());
  for (const auto& token : state.dynamic_cache.entries) {
    if (present.insert(token).second) words.push_back(token);
  }
  return words;
}

CacheSession::CacheSession(CacheDeps deps, StopwordFilter filter)
    : deps_(deps), filter_(std::move(filter)) {
  if (!deps_.model || !deps_.segmenter) {
    fail(ErrorKind::invariant, "cache session needs a topic model and segmenter");
  }
  if (deps_.topic_capacity < 1 || deps_.dynamic_capacity < 1) {
    fail(ErrorKind::config, "cache capacities must be >= 1");
  }
  state_.dynamic_cache.capacity = deps_.dynamic_capacity;
  state_.topic_cache.capacity = deps_.topic_capacity;
}

const TopicCache& CacheSession::topic_cache_for(std::size_t topic) {
  auto it = loaded_.find(topic);
  if (it == loaded_.end()) {
    it = loaded_
             .emplace(topic, load_topic_cache(*deps_.model, topic,
                                              deps_.topic_capacity, *deps_.segmenter))
             .first;
  }
  return it->second;
}

void CacheSession::begin_sentence(const std::string& unit_id, std::size_t topic) {
  if (in_sentence_) {
    fail(ErrorKind::invariant, "begin_sentence called twice without completing");
  }
  in_sentence_ = true;
  if (started_ && unit_id == state_.unit_id) return;
  if (started_) ++resets_;
  started_ = true;
  state_.unit_id = unit_id;
  state_.topic_cache = topic_cache_for(topic);
  state_.dynamic_cache.entries.clear();
}

void CacheSession::complete_sentence(std::span<const std::string> tokens) {
  if (!in_sentence_) fail(ErrorKind::invariant, "no sentence in progress");
  in_sentence_ = false;
  state_.dynamic_cache = update_dynamic(std::move(state_.dynamic_cache), tokens, filter_,
                                        deps_.segmenter->marker());
}

void write_snapshot(std::ostream& out, const CacheState& state) {
  nlohmann::json record = {{"unit_id", state.unit_id},
                           {"topic_id", state.topic_cache.topic},
                           {"topic_entries", state.topic_cache.entries},
                           {"dynamic_entries", state.dynamic_cache.entries}};
  out << record.dump() << '\n';
}

}  // namespace secmt::cache
