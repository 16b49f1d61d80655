#include "secmt/topics.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "secmt/artifact.hpp"
#include "secmt/error.hpp"
#include "secmt/random.hpp"
#include "secmt/text.hpp"

namespace secmt::topics {

std::string_view to_string(Granularity g) noexcept {
  return g == Granularity::section ? "section" : "document";
}

Granularity parse_granularity(std::string_view name) {
  if (name == "section") return Granularity::section;
  if (name == "document") return Granularity::document;
  fail(ErrorKind::config, "unknown granularity '" + std::string(name) +
                              "' (expected section or document)");
}

void LdaConfig::validate() const {
  if (topics < 1) fail(ErrorKind::config, "LDA needs at least one topic");
  if (!(alpha > 0.0)) fail(ErrorKind::config, "LDA alpha must be positive");
  if (!(beta > 0.0)) fail(ErrorKind::config, "LDA beta must be positive");
  if (burn_in > iterations) {
    fail(ErrorKind::config, "LDA burn_in exceeds iterations");
  }
}

std::string UnitId::key() const {
  if (!section_index) return doc_id;
  return doc_id + "#" + std::to_string(*section_index);
}

UnitId unit_of(const Sentence& sentence, Granularity granularity) {
  if (granularity == Granularity::document) return {sentence.doc_id, std::nullopt};
  return {sentence.doc_id, sentence.section_index};
}

std::vector<std::string> bag_of_words(std::span<const std::string> tokens,
                                      const WordSet& stopwords) {
  std::vector<std::string> bag;
  for (const auto& token : tokens) {
    if (text::is_punctuation_token(token)) continue;
    auto lowered = text::to_lower(token);
    if (stopwords.count(lowered)) continue;
    bag.push_back(std::move(lowered));
  }
  return bag;
}

std::vector<Unit> prepare_units(const StructuredCorpus& corpus,
                                Granularity granularity,
                                const WordSet& stopwords, bool keep_empty) {
  std::vector<Unit> units;
  for (const auto& doc : corpus) {
    if (granularity == Granularity::document) {
      Unit unit{{doc.doc_id, std::nullopt}, {}};
      for (const auto& section : doc.sections) {
        for (const auto& sentence : section.sentences) {
          auto bag = bag_of_words(sentence.tokens, stopwords);
          unit.words.insert(unit.words.end(), bag.begin(), bag.end());
        }
      }
      if (keep_empty || !unit.words.empty()) units.push_back(std::move(unit));
      continue;
    }
    for (const auto& section : doc.sections) {
      Unit unit{{doc.doc_id, section.section_index}, {}};
      for (const auto& sentence : section.sentences) {
        auto bag = bag_of_words(sentence.tokens, stopwords);
        unit.words.insert(unit.words.end(), bag.begin(), bag.end());
      }
      if (keep_empty || !unit.words.empty()) units.push_back(std::move(unit));
    }
  }
  return units;
}

std::size_t Vocabulary::add(const std::string& word) {
  const auto [it, inserted] = ids_.emplace(word, words_.size());
  if (inserted) words_.push_back(word);
  return it->second;
}

std::optional<std::size_t> Vocabulary::find(std::string_view word) const {
  const auto it = ids_.find(std::string(word));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

double TopicModel::word_probability(std::size_t topic, std::size_t word) const {
  const double v = static_cast<double>(vocab.size());
  return (static_cast<double>(count(topic, word)) + config.beta) /
         (static_cast<double>(topic_totals[topic]) + v * config.beta);
}

namespace {

std::size_t sample_index(std::span<const double> cumulative, Rng& rng) {
  const double target = rng.uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  return std::min(static_cast<std::size_t>(it - cumulative.begin()),
                  cumulative.size() - 1);
}

}  // namespace

LdaTrainingResult train_lda_detailed(std::span<const Unit> units,
                                     const LdaConfig& config,
                                     const SweepObserver& observer) {
  config.validate();
  if (units.empty()) fail(ErrorKind::config, "no units to train LDA on");

  const std::size_t K = config.topics;
  LdaTrainingResult result;
  TopicModel& model = result.model;
  model.config = config;

  std::vector<std::vector<std::uint32_t>> docs(units.size());
  std::vector<std::size_t> lengths(units.size());
  for (std::size_t u = 0; u < units.size(); ++u) {
    for (const auto& w : units[u].words) {
      docs[u].push_back(static_cast<std::uint32_t>(model.vocab.add(w)));
    }
    lengths[u] = docs[u].size();
  }
  const std::size_t V = model.vocab.size();
  model.word_topic.assign(V * K, 0);
  model.topic_totals.assign(K, 0);
  std::vector<std::uint32_t> unit_topic(units.size() * K, 0);

  Rng rng(config.seed);
  std::vector<std::vector<std::uint32_t>> assignments(units.size());
  for (std::size_t u = 0; u < docs.size(); ++u) {
    assignments[u].resize(docs[u].size());
    for (std::size_t i = 0; i < docs[u].size(); ++i) {
      const auto k = static_cast<std::uint32_t>(rng.index(K));
      assignments[u][i] = k;
      ++model.word_topic[docs[u][i] * K + k];
      ++model.topic_totals[k];
      ++unit_topic[u * K + k];
    }
  }

  const double alpha = config.alpha;
  const double beta = config.beta;
  const double vbeta = static_cast<double>(V) * beta;
  std::vector<double> cumulative(K);
  for (std::size_t sweep = 0; sweep < config.iterations; ++sweep) {
    for (std::size_t u = 0; u < docs.size(); ++u) {
      std::uint32_t* nu = &unit_topic[u * K];
      for (std::size_t i = 0; i < docs[u].size(); ++i) {
        const std::uint32_t w = docs[u][i];
        std::uint32_t* nw = &model.word_topic[w * K];
        const std::uint32_t old = assignments[u][i];
        --nu[old];
        --nw[old];
        --model.topic_totals[old];

        double total = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          total += (nu[k] + alpha) * (nw[k] + beta) /
                   (static_cast<double>(model.topic_totals[k]) + vbeta);
          cumulative[k] = total;
        }
        const auto k = static_cast<std::uint32_t>(sample_index(cumulative, rng));
        assignments[u][i] = k;
        ++nu[k];
        ++nw[k];
        ++model.topic_totals[k];
      }
    }
    if (observer) {
      observer(SweepView{sweep, K, V, unit_topic, model.word_topic,
                         model.topic_totals, lengths});
    }
  }

  result.unit_topic_counts.resize(units.size());
  for (std::size_t u = 0; u < units.size(); ++u) {
    result.unit_topic_counts[u].assign(unit_topic.begin() + u * K,
                                       unit_topic.begin() + (u + 1) * K);
  }
  return result;
}

TopicModel train_lda(std::span<const Unit> units, const LdaConfig& config,
                     const SweepObserver& observer) {
  return std::move(train_lda_detailed(units, config, observer).model);
}

TopicDistribution infer_topics(const TopicModel& model, const Unit& unit,
                               std::size_t iterations, std::uint64_t seed) {
  const std::size_t K = model.topics();
  TopicDistribution dist;
  std::vector<std::uint32_t> words;
  for (const auto& w : unit.words) {
    if (const auto id = model.vocab.find(w)) {
      words.push_back(static_cast<std::uint32_t>(*id));
    }
  }
  if (words.empty()) {
    dist.probs.assign(K, 1.0 / static_cast<double>(K));
    dist.uninformative = true;
    return dist;
  }

  const double alpha = model.config.alpha;
  const double beta = model.config.beta;
  const double vbeta = static_cast<double>(model.vocab_size()) * beta;
  std::vector<double> word_factor(K);
  Rng rng(seed);
  std::vector<std::uint32_t> nu(K, 0);
  std::vector<std::uint32_t> z(words.size());
  for (auto& k : z) {
    k = static_cast<std::uint32_t>(rng.index(K));
    ++nu[k];
  }
  std::vector<double> cumulative(K);
  for (std::size_t sweep = 0; sweep < iterations; ++sweep) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      --nu[z[i]];
      double total = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        total += (nu[k] + alpha) *
                 (model.count(k, words[i]) + beta) /
                 (static_cast<double>(model.topic_totals[k]) + vbeta);
        cumulative[k] = total;
      }
      z[i] = static_cast<std::uint32_t>(sample_index(cumulative, rng));
      ++nu[z[i]];
    }
  }

  dist.probs.resize(K);
  double sum = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    dist.probs[k] = nu[k] + alpha;
    sum += dist.probs[k];
  }
  for (auto& p : dist.probs) p /= sum;
  return dist;
}

std::uint64_t unit_seed(std::uint64_t seed, const UnitId& id) {
  return derive_seed(seed, fnv1a64(id.key()));
}

std::size_t dominant_topic(std::span<const double> probs) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < probs.size(); ++k) {
    if (probs[k] > probs[best]) best = k;
  }
  return best;
}

std::vector<RankedWord> top_words(const TopicModel& model, std::size_t topic,
                                  std::size_t n) {
  if (topic >= model.topics()) {
    fail(ErrorKind::input, "topic " + std::to_string(topic) + " out of range");
  }
  std::vector<std::size_t> ids(model.vocab_size());
  std::iota(ids.begin(), ids.end(), 0);
  const std::size_t take = std::min(n, ids.size());
  // Ranking by count is ranking by probability; the denominator is shared.
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(take),
                    ids.end(), [&](std::size_t a, std::size_t b) {
                      const auto ca = model.count(topic, a);
                      const auto cb = model.count(topic, b);
                      return ca != cb ? ca > cb : a < b;
                    });
  std::vector<RankedWord> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.push_back({model.vocab.word(ids[i]), model.word_probability(topic, ids[i])});
  }
  return out;
}

namespace {

constexpr std::string_view kModelMagic = "secmt-topic-model";

std::string expect_line(std::istream& in, std::string_view what) {
  std::string line;
  if (!std::getline(in, line)) {
    fail(ErrorKind::data, "topic model truncated before " + std::string(what));
  }
  return line;
}

std::string field(std::istream& in, std::string_view key) {
  const auto line = expect_line(in, key);
  const auto space = line.find(' ');
  if (space == std::string::npos || line.substr(0, space) != key) {
    fail(ErrorKind::data, "topic model: expected '" + std::string(key) + "'");
  }
  return line.substr(space + 1);
}

}  // namespace

void write_model(std::ostream& out, const TopicModel& model,
                 std::string_view config_hash) {
  const auto& c = model.config;
  out << kModelMagic << " 1\n"
      << "config " << (config_hash.empty() ? "-" : config_hash) << '\n'
      << "topics " << c.topics << '\n'
      << "alpha " << format_double(c.alpha) << '\n'
      << "beta " << format_double(c.beta) << '\n'
      << "iterations " << c.iterations << '\n'
      << "burn_in " << c.burn_in << '\n'
      << "seed " << c.seed << '\n'
      << "granularity " << to_string(c.granularity) << '\n'
      << "vocab " << model.vocab_size() << '\n';
  for (const auto& w : model.vocab.words()) out << w << '\n';
  std::size_t nonzero = 0;
  for (auto n : model.word_topic) nonzero += n != 0;
  out << "counts " << nonzero << '\n';
  const std::size_t K = c.topics;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t w = 0; w < model.vocab_size(); ++w) {
      if (const auto n = model.count(k, w)) out << k << ' ' << w << ' ' << n << '\n';
    }
  }
}

TopicModel read_model(std::istream& in) {
  const auto magic = expect_line(in, "header");
  if (magic != std::string(kModelMagic) + " 1") {
    fail(ErrorKind::data, "not a version 1 topic model");
  }
  TopicModel model;
  auto& c = model.config;
  field(in, "config");
  c.topics = parse_uint(field(in, "topics"));
  c.alpha = parse_double(field(in, "alpha"));
  c.beta = parse_double(field(in, "beta"));
  c.iterations = parse_uint(field(in, "iterations"));
  c.burn_in = parse_uint(field(in, "burn_in"));
  c.seed = parse_uint(field(in, "seed"));
  c.granularity = parse_granularity(field(in, "granularity"));
  try {
    c.validate();
  } catch (const Error& e) {
    fail(ErrorKind::data, std::string("topic model: ") + e.what());
  }
  const std::size_t V = parse_uint(field(in, "vocab"));
  for (std::size_t i = 0; i < V; ++i) {
    const auto word = expect_line(in, "vocabulary");
    if (model.vocab.add(word) != i) {
      fail(ErrorKind::data, "topic model: duplicate vocabulary entry '" + word + "'");
    }
  }
  const std::size_t K = c.topics;
  model.word_topic.assign(V * K, 0);
  model.topic_totals.assign(K, 0);
  const std::size_t n = parse_uint(field(in, "counts"));
  for (std::size_t i = 0; i < n; ++i) {
    std::istringstream row(expect_line(in, "counts"));
    std::size_t k = 0, w = 0;
    std::uint64_t count = 0;
    if (!(row >> k >> w >> count) || k >= K || w >= V) {
      fail(ErrorKind::data, "topic model: bad count triple");
    }
    model.word_topic[w * K + k] = static_cast<std::uint32_t>(count);
    model.topic_totals[k] += count;
  }
  return model;
}

}  // namespace secmt::topics
