#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "secmt/topics.hpp"

namespace secmt::xalign {

// Source-to-target topic correspondence learned from parallel sections.
struct TopicAlignment {
  std::size_t source_topics = 0;
  std::size_t target_topics = 0;
  std::vector<std::uint64_t> counts;      // source_topics x target_topics
  std::vector<std::size_t> projection;    // one target topic per source topic
  std::size_t fallback = 0;               // for source topics never observed

  std::uint64_t count(std::size_t s, std::size_t t) const {
    return counts[s * target_topics + t];
  }
  std::uint64_t total() const;
  bool operator==(const TopicAlignment&) const = default;
};

struct TopicPair {
  std::size_t source = 0;
  std::size_t target = 0;
};

// Counts co-occurring dominant topics. Observed rows project to their argmax
// (ties to the lowest target id); unobserved rows and the fallback use the
// most frequent target dominant topic overall.
TopicAlignment alignment_from_pairs(std::span<const TopicPair> pairs,
                                    std::size_t source_topics,
                                    std::size_t target_topics);

struct InferenceConfig {
  std::size_t iterations = 100;
  std::uint64_t seed = 1;
};

using UnitPair = std::pair<topics::Unit, topics::Unit>;

// Dominant topics of every section pair, for inspection and tests.
std::vector<TopicPair> dominant_pairs(std::span<const UnitPair> sections,
                                      const topics::TopicModel& source_model,
                                      const topics::TopicModel& target_model,
                                      const InferenceConfig& config);

TopicAlignment build_alignment(std::span<const UnitPair> sections,
                               const topics::TopicModel& source_model,
                               const topics::TopicModel& target_model,
                               const InferenceConfig& config);

std::size_t project_topic(const TopicAlignment& alignment, std::size_t source_topic);

void write_alignment(std::ostream& out, const TopicAlignment& alignment,
                     std::string_view config_hash = {});
TopicAlignment read_alignment(std::istream& in);

}  // namespace secmt::xalign
