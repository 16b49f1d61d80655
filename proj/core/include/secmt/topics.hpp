#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "secmt/corpus.hpp"
#include "secmt/resources.hpp"

namespace secmt::topics {

enum class Granularity { section, document };

std::string_view to_string(Granularity g) noexcept;
Granularity parse_granularity(std::string_view name);

struct LdaConfig {
  std::size_t topics = 100;
  double alpha = 0.001;  // unit-topic prior
  double beta = 0.01;    // topic-word prior
  std::size_t iterations = 1000;
  std::size_t burn_in = 0;  // counts come from the final sweep; kept for provenance
  std::uint64_t seed = 1;
  Granularity granularity = Granularity::section;

  void validate() const;
  bool operator==(const LdaConfig&) const = default;
};

struct UnitId {
  std::string doc_id;
  std::optional<std::size_t> section_index;  // absent for whole documents

  std::string key() const;  // "doc" or "doc#3"
  auto operator<=>(const UnitId&) const = default;
};

UnitId unit_of(const Sentence& sentence, Granularity granularity);

// A bag of lowercased content tokens, kept in text order.
struct Unit {
  UnitId id;
  std::vector<std::string> words;
};

// Lowercases and drops stopwords and pure-punctuation tokens.
std::vector<std::string> bag_of_words(std::span<const std::string> tokens,
                                      const WordSet& stopwords);

// One unit per section (or per document); empty bags are dropped unless
// keep_empty is set.
std::vector<Unit> prepare_units(const StructuredCorpus& corpus,
                                Granularity granularity,
                                const WordSet& stopwords,
                                bool keep_empty = false);

class Vocabulary {
 public:
  std::size_t add(const std::string& word);
  std::optional<std::size_t> find(std::string_view word) const;
  const std::string& word(std::size_t id) const { return words_.at(id); }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> ids_;
};

struct TopicModel {
  LdaConfig config;
  Vocabulary vocab;
  // Word-major: word_topic[w * topics + k].
  std::vector<std::uint32_t> word_topic;
  std::vector<std::uint64_t> topic_totals;

  std::size_t topics() const { return config.topics; }
  std::size_t vocab_size() const { return vocab.size(); }
  std::uint32_t count(std::size_t topic, std::size_t word) const {
    return word_topic[word * config.topics + topic];
  }
  // (n_kw + beta) / (n_k + V * beta)
  double word_probability(std::size_t topic, std::size_t word) const;
};

// Counts after one Gibbs sweep, for invariant checks.
struct SweepView {
  std::size_t sweep = 0;
  std::size_t topics = 0;
  std::size_t vocab_size = 0;
  std::span<const std::uint32_t> unit_topic;   // units x topics
  std::span<const std::uint32_t> word_topic;   // vocab x topics
  std::span<const std::uint64_t> topic_totals;
  std::span<const std::size_t> unit_lengths;
};

using SweepObserver = std::function<void(const SweepView&)>;

struct LdaTrainingResult {
  TopicModel model;
  std::vector<std::vector<std::uint32_t>> unit_topic_counts;
};

// Collapsed Gibbs sampling; each token is resampled with
//   p(z = k) ∝ (n_uk + alpha) (n_kw + beta) / (n_k + V beta)
// from counts that exclude the token itself. Deterministic given the seed.
LdaTrainingResult train_lda_detailed(std::span<const Unit> units,
                                     const LdaConfig& config,
                                     const SweepObserver& observer = {});
TopicModel train_lda(std::span<const Unit> units, const LdaConfig& config,
                     const SweepObserver& observer = {});

struct TopicDistribution {
  std::vector<double> probs;
  bool uninformative = false;  // no known words; probs is uniform
};

// Gibbs sampling with the model's topic-word counts frozen. Returns
// (n_uk + alpha) / sum_k (n_uk + alpha); unknown words are skipped.
TopicDistribution infer_topics(const TopicModel& model, const Unit& unit,
                               std::size_t iterations, std::uint64_t seed);

// Per-unit inference seed, independent of the order units are visited in.
std::uint64_t unit_seed(std::uint64_t seed, const UnitId& id);

// Argmax, ties to the lowest topic id.
std::size_t dominant_topic(std::span<const double> probs);

struct RankedWord {
  std::string word;
  double probability = 0.0;
};

// The min(n, V) most probable words of a topic; ties by word id.
std::vector<RankedWord> top_words(const TopicModel& model, std::size_t topic,
                                  std::size_t n);

void write_model(std::ostream& out, const TopicModel& model,
                 std::string_view config_hash = {});
TopicModel read_model(std::istream& in);

}  // namespace secmt::topics
