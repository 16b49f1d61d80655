#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "oracles.hpp"
#include "secmt/cache.hpp"
#include "secmt/error.hpp"

using namespace secmt;
using namespace secmt::cache;
using Strings = std::vector<std::string>;

namespace {

StopwordFilter english() { return StopwordFilter({"the", "of", "was", "he"}, {"was", "he"}); }

}  // namespace

TEST_SUITE("cache") {
  TEST_CASE("stopword filter keeps content words and exceptions") {
    const auto f = english();
    CHECK(f.passes("married"));
    CHECK_FALSE(f.passes("the"));
    CHECK_FALSE(f.passes("The"));
    CHECK(f.passes("was"));
    CHECK(f.passes("He"));
    CHECK_FALSE(f.passes("."));
    const auto shipped = StopwordFilter::for_language("en");
    CHECK(shipped.passes("were"));
    CHECK(shipped.passes("she"));
    CHECK_FALSE(shipped.passes("and"));
  }

  TEST_CASE("topic cache fill rule") {
    // Ranking a > bc > d; "bc" segments to [b@@, c] with an empty table.
    const auto model = oracle::make_model({"a", "bc", "d"}, {{9}, {5}, {1}}, 1);
    const bpe::MergeTable none;
    const auto cache = load_topic_cache(model, 0, 3, none);
    CHECK(cache.entries == Strings{"a", "b@@", "c"});
    CHECK(load_topic_cache(model, 0, 10, none).entries == Strings{"a", "b@@", "c", "d"});
    CHECK_THROWS_AS(load_topic_cache(model, 0, 0, none), Error);
  }

  TEST_CASE("already present subwords contribute nothing") {
    const auto model = oracle::make_model({"ab", "a", "b", "x"}, {{9}, {5}, {4}, {1}}, 1);
    const bpe::MergeTable none;
    CHECK(load_topic_cache(model, 0, 10, none).entries == Strings{"a@@", "b", "a", "x"});
  }

  TEST_CASE("topic cache matches the hand-computed segmented ranking") {
    const auto table = bpe::learn_bpe({{"married", 10}, {"marriage", 10}, {"wife", 10}}, 30);
    const auto model = oracle::make_model({"wife", "married", "marriage", "son"},
                                          {{3, 0}, {8, 1}, {5, 0}, {1, 9}}, 2);
    const auto expected = oracle::topic_cache(model, 0, 6, table);
    CHECK(load_topic_cache(model, 0, 6, table).entries == expected);
    CHECK(expected.front() == bpe::apply_bpe("married", table).front());
  }

  TEST_CASE("dynamic cache eviction and uniqueness") {
    DynamicCache c{{"a", "b", "c"}, 3};
    const auto f = english();
    CHECK(update_dynamic(c, Strings{"d"}, f).entries == Strings{"b", "c", "d"});
    CHECK(update_dynamic(c, Strings{"b"}, f).entries == Strings{"a", "b", "c"});
    CHECK(update_dynamic(c, Strings{"the", "of", "."}, f).entries == Strings{"a", "b", "c"});
    DynamicCache empty{{}, 4};
    CHECK(update_dynamic(empty, Strings{"mar@@", "ried", "the", "was"}, f).entries ==
          Strings{"mar@@", "ried", "was"});
  }

  TEST_CASE("5-sentence section matches a replay") {
    oracle::DynamicReplay replay{10, {"born", "village", "married", "wife", "was", "he",
                                      "children", "died", "buried", "mother"}, {}};
    DynamicCache cache{{}, 10};
    const std::vector<Strings> sentences{
        {"he", "was", "born", "in", "a", "vil@@", "lage", "."},
        {"the", "mother", "was", "born", "."},
        {"he", "married", "his", "wife", "."},
        {"children", "of", "the", "wife", "."},
        {"he", "died", "and", "was", "buried", "."}};
    const StopwordFilter strict({"in", "a", "his", "and", "of", "the"}, {"was", "he"});
    for (const auto& s : sentences) {
      cache = update_dynamic(cache, s, strict);
      replay.complete(s);
      CHECK(cache.entries == replay.entries);
      CHECK(cache.entries.size() <= 10);
    }
  }

  TEST_CASE("concatenation removes duplicates at the dynamic position") {
    CacheState s;
    s.topic_cache.entries = {"a", "b"};
    s.dynamic_cache.entries = {"b", "c"};
    CHECK(cache_words(s) == Strings{"a", "b", "c"});
    s.dynamic_cache.entries.clear();
    CHECK(cache_words(s) == Strings{"a", "b"});
  }

  TEST_CASE("session resets at unit boundaries only") {
    const auto model = oracle::make_model({"x", "y", "z"}, {{5, 0}, {0, 5}, {1, 1}}, 2);
    const bpe::Segmenter seg(bpe::MergeTable{});
    CacheSession session({&model, &seg, 2, 5}, english());

    session.begin_sentence("doc#0", 0);
    CHECK(session.words() == Strings{"x", "z"});
    session.complete_sentence(Strings{"new", "word"});
    session.begin_sentence("doc#0", 0);
    CHECK(session.state().dynamic_cache.entries == Strings{"new", "word"});
    session.complete_sentence(Strings{"more"});

    session.begin_sentence("doc#1", 0);
    CHECK(session.state().dynamic_cache.entries.empty());
    CHECK(session.resets() == 1);
    const auto topic0 = session.state().topic_cache;
    session.complete_sentence(Strings{});
    session.begin_sentence("doc#2", 0);
    CHECK(session.state().topic_cache == topic0);
    CHECK_THROWS_AS(session.begin_sentence("doc#2", 0), Error);
  }

  TEST_CASE("document-granularity units never reset inside a document") {
    const auto model = oracle::make_model({"x"}, {{1}}, 1);
    const bpe::Segmenter seg(bpe::MergeTable{});
    CacheSession session({&model, &seg, 2, 5}, english());
    for (int section = 0; section < 3; ++section) {
      for (int i = 0; i < 2; ++i) {
        session.begin_sentence("doc", 0);
        session.complete_sentence(Strings{"w" + std::to_string(section)});
      }
    }
    CHECK(session.resets() == 0);
    CHECK(session.state().dynamic_cache.entries == Strings{"w0", "w1", "w2"});
  }

  TEST_CASE("snapshot line") {
    CacheState s;
    s.unit_id = "d#1";
    s.topic_cache = {{"a"}, 1, 4};
    s.dynamic_cache = {{"b"}, 1};
    std::stringstream out;
    write_snapshot(out, s);
    const auto j = nlohmann::json::parse(out.str());
    CHECK(j.at("unit_id") == "d#1");
    CHECK(j.at("topic_id") == 4);
    CHECK(j.at("dynamic_entries") == nlohmann::json::array({"b"}));
  }
}
