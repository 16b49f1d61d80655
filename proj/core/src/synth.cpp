#include "secmt/synth.hpp"

#include <array>
#include <cmath>
#include <map>
#include <ostream>

#include "secmt/error.hpp"
#include "secmt/random.hpp"
#include "secmt/text.hpp"

namespace secmt::synth {

namespace {

struct Topic {
  std::string heading;
  std::vector<std::string> words;
};

const std::vector<Topic>& topics() {
  static const std::vector<Topic> table = {
      {"Early life",
       {"born", "parents", "childhood", "village", "father", "mother", "grew",
        "school", "brother", "sister", "family", "farm", "young", "raised", "town",
        "attended", "baptised", "orphan", "youth", "hometown", "infant", "cradle",
        "nursery", "sibling", "uncle"}},
      {"Education",
       {"university", "studied", "degree", "graduated", "college", "professor",
        "thesis", "doctorate", "lecture", "scholarship", "academy", "philosophy",
        "mathematics", "student", "enrolled", "diploma", "faculty", "campus",
        "seminar", "tutor", "examination", "library", "classmate", "dean",
        "semester"}},
      {"Career",
       {"worked", "company", "appointed", "director", "founded", "manager", "firm",
        "elected", "office", "minister", "council", "party", "campaign",
        "parliament", "served", "senator", "mayor", "governor", "policy",
        "committee", "ministry", "cabinet", "deputy", "colleague", "promoted"}},
      {"Artistic work",
       {"album", "song", "singer", "released", "concert", "band", "tour",
        "recorded", "single", "stage", "debut", "film", "actor", "role", "theatre",
        "television", "studio", "chart", "guitar", "melody", "audience",
        "premiere", "drama", "lyrics", "soundtrack"}},
      {"Personal life",
       {"married", "wife", "husband", "children", "daughter", "son", "divorced",
        "wedding", "couple", "lived", "home", "partner", "engaged",
        "grandchildren", "romance", "spouse", "household", "widow", "anniversary",
        "honeymoon", "fiance", "adopted", "twins", "marriage", "sweetheart"}},
      {"Death and legacy",
       {"died", "death", "buried", "funeral", "cemetery", "illness", "hospital",
        "memorial", "legacy", "honoured", "award", "prize", "statue", "tribute",
        "remembered", "grave", "cancer", "mourned", "monument", "posthumously",
        "obituary", "heritage", "commemorated", "museum", "centenary"}},
  };
  return table;
}

const Topic& geography() {
  static const Topic topic{
      "Geography",
      {"river", "mountain", "valley", "lake", "source", "basin", "tributary",
       "delta", "glacier", "plateau", "estuary", "flows", "altitude", "border",
       "region", "forest", "coast", "bridge", "canal", "reservoir"}};
  return topic;
}

// English function word and its French counterpart.
const std::vector<std::pair<std::string, std::string>>& function_words() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"the", "le"},   {"of", "de"},     {"in", "dans"},  {"and", "et"},
      {"a", "un"},     {"to", "vers"},   {"was", "était"}, {"he", "il"},
      {"she", "elle"}, {"his", "son"},   {"her", "sa"},   {"with", "avec"},
      {"for", "pour"}, {"at", "chez"},   {"on", "sur"},   {"by", "par"},
      {"from", "depuis"}, {"as", "comme"},
  };
  return table;
}

const std::vector<std::string>& nationalities() {
  static const std::vector<std::string> table = {
      "French", "Bulgarian", "Chinese", "Belgian", "Canadian", "Swiss"};
  return table;
}

const std::vector<std::string>& professions() {
  static const std::vector<std::string> table = {
      "writers", "politicians", "singers", "actors", "football players"};
  return table;
}

std::string doc_name(std::string_view prefix, std::size_t i) {
  std::string digits = std::to_string(i);
  return std::string(prefix) + std::string(4 - std::min<std::size_t>(4, digits.size()), '0') +
         digits;
}

std::size_t between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + rng.index(hi - lo + 1);
}

// A sentence as parallel word lists, without the final period.
struct SentencePair {
  std::vector<std::string> target;
  std::vector<std::string> source;
};

std::string translate_function(const std::string& word) {
  for (const auto& [en, fr] : function_words()) {
    if (en == word) return fr;
  }
  return word;
}

SentencePair make_sentence(Rng& rng, const std::vector<std::string>& vocabulary) {
  SentencePair s;
  const std::size_t length = between(rng, 6, 12);
  const auto& fw = function_words();
  for (std::size_t i = 0; i < length; ++i) {
    std::string word;
    if (i + 1 == length || rng.uniform() < 0.6) {
      // Squared draw skews towards the head of the list.
      const double u = rng.uniform();
      word = vocabulary[static_cast<std::size_t>(u * u * static_cast<double>(vocabulary.size()))];
      s.source.push_back(encipher(word));
    } else {
      word = fw[rng.index(fw.size())].first;
      s.source.push_back(translate_function(word));
    }
    s.target.push_back(std::move(word));
  }
  return s;
}

std::string render(const std::vector<std::string>& words) {
  return text::join(words, " ") + ".";
}

std::string heading_line(std::string_view title, std::size_t depth) {
  const std::string marks(depth, '=');
  return "\n" + marks + " " + std::string(title) + " " + marks + "\n";
}

}  // namespace

void SynthOptions::validate() const {
  if (min_sections < 1 || max_sections < min_sections) {
    fail(ErrorKind::config, "synth: need 1 <= min_sections <= max_sections");
  }
  if (min_sentences < 1 || max_sentences < min_sentences) {
    fail(ErrorKind::config, "synth: need 1 <= min_sentences <= max_sentences");
  }
  if (!(noise_rate >= 0.0 && noise_rate < 1.0) || !(merge_rate >= 0.0 && merge_rate < 1.0)) {
    fail(ErrorKind::config, "synth: rates must lie in [0, 1)");
  }
}

std::size_t topic_count() { return topics().size(); }

const std::vector<std::string>& topic_words(std::size_t topic) {
  return topics().at(topic).words;
}

std::string encipher(std::string_view word) {
  static constexpr std::string_view key = "qwertyuiopasdfghjklzxcvbnm";
  std::string out;
  for (char c : word) {
    out.push_back(c >= 'a' && c <= 'z' ? key[static_cast<std::size_t>(c - 'a')] : c);
  }
  return out + "o";
}

SynthCorpus generate(const SynthOptions& options) {
  options.validate();
  Rng rng(options.seed);
  SynthCorpus corpus;
  const std::size_t total = options.biographies + options.other_documents;

  for (std::size_t d = 0; d < total; ++d) {
    const bool bio = d < options.biographies;
    RawDocument src;
    RawDocument tgt;
    src.doc_id = tgt.doc_id = doc_name(bio ? "bio" : "geo", d);
    src.lang = "fr";
    tgt.lang = "en";
    if (bio) {
      const auto& nat = nationalities()[rng.index(nationalities().size())];
      const auto& job = professions()[rng.index(professions().size())];
      tgt.categories = {nat + " " + job, std::to_string(1900 + rng.index(90)) + " births"};
    } else {
      tgt.categories = {"Rivers of " + nationalities()[rng.index(nationalities().size())]};
    }
    src.categories = tgt.categories;

    // Section topics: a lead section and a shuffled subset of biography topics.
    std::vector<std::size_t> order(topics().size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    const std::size_t n_sections = between(rng, options.min_sections, options.max_sections);
    std::vector<std::size_t> section_topics;
    section_topics.push_back(order[0]);
    for (std::size_t s = 1; s < n_sections; ++s) section_topics.push_back(order[s % order.size()]);

    for (std::size_t s = 0; s < section_topics.size(); ++s) {
      const Topic& topic = bio ? topics()[section_topics[s]] : geography();
      if (s > 0) {
        const std::size_t depth = s % 3 == 0 ? 3 : 2;
        src.text += heading_line(encipher(text::to_lower(topic.heading.substr(0, topic.heading.find(' ')))), depth);
        tgt.text += heading_line(topic.heading, depth);
      }
      const std::size_t n = between(rng, options.min_sentences, options.max_sentences);
      std::vector<std::string> src_sentences;
      std::vector<std::string> tgt_sentences;
      for (std::size_t i = 0; i < n; ++i) {
        auto pair = make_sentence(rng, topic.words);
        src_sentences.push_back(render(pair.source));
        if (i > 0 && rng.uniform() < options.merge_rate) {
          tgt_sentences.back().pop_back();
          tgt_sentences.back() += " and " + render(pair.target);
        } else {
          tgt_sentences.push_back(render(pair.target));
        }
        if (rng.uniform() < options.noise_rate) {
          const Topic& other = topics()[rng.index(topics().size())];
          src_sentences.push_back(render(make_sentence(rng, other.words).source));
        }
      }
      src.text += text::join(src_sentences, " ");
      tgt.text += text::join(tgt_sentences, " ");
    }
    if (!bio) section_topics.assign(section_topics.size(), topics().size());
    corpus.section_topics.push_back(std::move(section_topics));
    corpus.source.push_back(std::move(src));
    corpus.target.push_back(std::move(tgt));
  }

  std::map<std::string, std::string> lexicon;
  for (const auto& topic : topics()) {
    for (const auto& w : topic.words) lexicon.emplace(encipher(w), w);
  }
  for (const auto& w : geography().words) lexicon.emplace(encipher(w), w);
  for (const auto& [en, fr] : function_words()) lexicon.emplace(fr, en);
  corpus.lexicon.assign(lexicon.begin(), lexicon.end());
  return corpus;
}

void write_lexicon(std::ostream& out,
                   const std::vector<std::pair<std::string, std::string>>& lexicon) {
  for (const auto& [source, target] : lexicon) out << source << '\t' << target << '\n';
}

}  // namespace secmt::synth
