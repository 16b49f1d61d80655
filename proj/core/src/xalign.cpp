#include "secmt/xalign.hpp"

#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "secmt/artifact.hpp"
#include "secmt/error.hpp"

namespace secmt::xalign {

std::uint64_t TopicAlignment::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

namespace {

void finalize_projection(TopicAlignment& a) {
  std::vector<std::uint64_t> column(a.target_topics, 0);
  for (std::size_t s = 0; s < a.source_topics; ++s) {
    for (std::size_t t = 0; t < a.target_topics; ++t) column[t] += a.count(s, t);
  }
  a.fallback = 0;
  for (std::size_t t = 1; t < a.target_topics; ++t) {
    if (column[t] > column[a.fallback]) a.fallback = t;
  }
  a.projection.assign(a.source_topics, a.fallback);
  for (std::size_t s = 0; s < a.source_topics; ++s) {
    std::size_t best = 0;
    std::uint64_t best_count = 0;
    for (std::size_t t = 0; t < a.target_topics; ++t) {
      if (a.count(s, t) > best_count) {
        best_count = a.count(s, t);
        best = t;
      }
    }
    if (best_count > 0) a.projection[s] = best;
  }
}

}  // namespace

TopicAlignment alignment_from_pairs(std::span<const TopicPair> pairs,
                                    std::size_t source_topics,
                                    std::size_t target_topics) {
  if (pairs.empty()) {
    fail(ErrorKind::config, "topic alignment needs at least one section pair");
  }
  if (source_topics == 0 || target_topics == 0) {
    fail(ErrorKind::config, "topic alignment needs non-empty topic sets");
  }
  TopicAlignment a;
  a.source_topics = source_topics;
  a.target_topics = target_topics;
  a.counts.assign(source_topics * target_topics, 0);
  for (const auto& p : pairs) {
    if (p.source >= source_topics || p.target >= target_topics) {
      fail(ErrorKind::input, "topic pair out of range");
    }
    ++a.counts[p.source * target_topics + p.target];
  }
  finalize_projection(a);
  return a;
}

std::vector<TopicPair> dominant_pairs(std::span<const UnitPair> sections,
                                      const topics::TopicModel& source_model,
                                      const topics::TopicModel& target_model,
                                      const InferenceConfig& config) {
  std::vector<TopicPair> pairs;
  pairs.reserve(sections.size());
  for (const auto& [src, tgt] : sections) {
    const auto ds = topics::infer_topics(source_model, src, config.iterations,
                                         topics::unit_seed(config.seed, src.id));
    const auto dt = topics::infer_topics(target_model, tgt, config.iterations,
                                         topics::unit_seed(config.seed, tgt.id));
    pairs.push_back({topics::dominant_topic(ds.probs), topics::dominant_topic(dt.probs)});
  }
  return pairs;
}

TopicAlignment build_alignment(std::span<const UnitPair> sections,
                               const topics::TopicModel& source_model,
                               const topics::TopicModel& target_model,
                               const InferenceConfig& config) {
  if (sections.empty()) {
    fail(ErrorKind::config, "topic alignment needs at least one section pair");
  }
  const auto pairs = dominant_pairs(sections, source_model, target_model, config);
  return alignment_from_pairs(pairs, source_model.topics(), target_model.topics());
}

std::size_t project_topic(const TopicAlignment& alignment, std::size_t source_topic) {
  if (source_topic >= alignment.source_topics) {
    fail(ErrorKind::input, "source topic " + std::to_string(source_topic) +
                               " out of range [0, " +
                               std::to_string(alignment.source_topics) + ")");
  }
  return alignment.projection[source_topic];
}

namespace {

constexpr std::string_view kMagic = "secmt-topic-alignment 1";

std::string next_line(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::data, "topic alignment truncated");
  return line;
}

std::uint64_t keyed(std::istream& in, std::string_view key) {
  const auto line = next_line(in);
  if (line.rfind(std::string(key) + " ", 0) != 0) {
    fail(ErrorKind::data, "topic alignment: expected '" + std::string(key) + "'");
  }
  return parse_uint(std::string_view(line).substr(key.size() + 1));
}

}  // namespace

void write_alignment(std::ostream& out, const TopicAlignment& a,
                     std::string_view config_hash) {
  out << kMagic << '\n'
      << "config " << (config_hash.empty() ? "-" : config_hash) << '\n'
      << "source_topics " << a.source_topics << '\n'
      << "target_topics " << a.target_topics << '\n'
      << "fallback " << a.fallback << '\n';
  std::size_t nonzero = 0;
  for (auto c : a.counts) nonzero += c != 0;
  out << "counts " << nonzero << '\n';
  for (std::size_t s = 0; s < a.source_topics; ++s) {
    for (std::size_t t = 0; t < a.target_topics; ++t) {
      if (a.count(s, t)) out << s << ' ' << t << ' ' << a.count(s, t) << '\n';
    }
  }
  out << "projection " << a.source_topics << '\n';
  for (std::size_t s = 0; s < a.source_topics; ++s) {
    out << s << ' ' << a.projection[s] << '\n';
  }
}

TopicAlignment read_alignment(std::istream& in) {
  if (next_line(in) != kMagic) fail(ErrorKind::data, "not a version 1 topic alignment");
  next_line(in);  // config hash
  TopicAlignment a;
  a.source_topics = keyed(in, "source_topics");
  a.target_topics = keyed(in, "target_topics");
  a.fallback = keyed(in, "fallback");
  if (a.fallback >= a.target_topics) fail(ErrorKind::data, "fallback out of range");
  a.counts.assign(a.source_topics * a.target_topics, 0);
  const auto n = keyed(in, "counts");
  for (std::uint64_t i = 0; i < n; ++i) {
    std::istringstream row(next_line(in));
    std::size_t s = 0, t = 0;
    std::uint64_t c = 0;
    if (!(row >> s >> t >> c) || s >= a.source_topics || t >= a.target_topics) {
      fail(ErrorKind::data, "topic alignment: bad count triple");
    }
    a.counts[s * a.target_topics + t] = c;
  }
  const auto m = keyed(in, "projection");
  if (m != a.source_topics) fail(ErrorKind::data, "projection size mismatch");
  a.projection.assign(a.source_topics, 0);
  for (std::uint64_t i = 0; i < m; ++i) {
    std::istringstream row(next_line(in));
    std::size_t s = 0, t = 0;
    if (!(row >> s >> t) || s >= a.source_topics || t >= a.target_topics) {
      fail(ErrorKind::data, "topic alignment: bad projection entry");
    }
    a.projection[s] = t;
  }
  return a;
}

}  // namespace secmt::xalign
