#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "oracles.hpp"
#include "secmt/error.hpp"
#include "secmt/xalign.hpp"

using namespace secmt;
using namespace secmt::xalign;

TEST_SUITE("xalign") {
  TEST_CASE("projection follows the co-occurrence argmax") {
    const std::vector<TopicPair> pairs{{2, 5}, {2, 5}, {2, 5}};
    const auto a = alignment_from_pairs(pairs, 4, 6);
    CHECK(project_topic(a, 2) == 5);
    CHECK(a.total() == 3);
    CHECK(a.fallback == 5);
    CHECK(project_topic(a, 0) == 5);
    CHECK_THROWS_AS(project_topic(a, 4), Error);
    CHECK(project_topic(a, 2) == project_topic(a, 2));
  }

  TEST_CASE("ties go to the lowest target topic") {
    std::vector<TopicPair> pairs;
    for (int i = 0; i < 4; ++i) pairs.push_back({0, 1});
    for (int i = 0; i < 4; ++i) pairs.push_back({0, 2});
    pairs.push_back({1, 0});
    const auto a = alignment_from_pairs(pairs, 2, 3);
    CHECK(a.projection[0] == 1);
    CHECK(a.projection[1] == 0);
    CHECK(a.fallback == 1);
  }

  TEST_CASE("empty input is a configuration error") {
    CHECK_THROWS_AS(alignment_from_pairs(std::vector<TopicPair>{}, 2, 2), Error);
  }

  TEST_CASE("file round trip") {
    const std::vector<TopicPair> pairs{{0, 1}, {1, 1}, {2, 0}, {2, 0}};
    const auto a = alignment_from_pairs(pairs, 4, 2);
    std::stringstream s;
    write_alignment(s, a, "h");
    const auto back = read_alignment(s);
    CHECK(back == a);
    std::stringstream t;
    write_alignment(t, back, "h");
    std::stringstream u;
    write_alignment(u, a, "h");
    CHECK(t.str() == u.str());
  }

  TEST_CASE("build_alignment recovers a permutation between hand-built models") {
    const std::vector<std::size_t> pi{2, 0, 1};
    std::vector<std::string> src_words;
    std::vector<std::string> tgt_words;
    std::vector<std::vector<std::uint32_t>> counts;
    for (std::size_t k = 0; k < 3; ++k) {
      src_words.push_back("s" + std::to_string(k));
      tgt_words.push_back("t" + std::to_string(k));
      std::vector<std::uint32_t> row(3, 0);
      row[k] = 50;
      counts.push_back(row);
    }
    const auto src = oracle::make_model(src_words, counts, 3);
    const auto tgt = oracle::make_model(tgt_words, counts, 3);
    std::vector<UnitPair> sections;
    for (std::size_t i = 0; i < 30; ++i) {
      const std::size_t k = i % 3;
      const std::string id = "d" + std::to_string(i);
      sections.push_back({{{id, 0}, std::vector<std::string>(5, src_words[k])},
                          {{id, 0}, std::vector<std::string>(5, tgt_words[pi[k]])}});
    }
    const auto a = build_alignment(sections, src, tgt, {20, 3});
    CHECK(a.projection == pi);
    CHECK(a.total() == 30);
    CHECK(a.count(0, 2) == 10);
    CHECK_THROWS_AS(build_alignment(std::vector<UnitPair>{}, src, tgt, {20, 3}), Error);
  }
}
