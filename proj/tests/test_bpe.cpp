#include <doctest.h>

#include <set>
#include <sstream>

#include "helpers.hpp"
#include "secmt/bpe.hpp"
#include "secmt/error.hpp"
#include "secmt/random.hpp"

using namespace secmt;
using bpe::MergeTable;
using bpe::SymbolPair;
using Strings = std::vector<std::string>;

namespace {

std::string random_word(Rng& rng) {
  static const Strings alphabet{"a", "b", "c", "é", "中", "@", "x"};
  std::string w;
  const std::size_t n = 1 + rng.index(8);
  for (std::size_t i = 0; i < n; ++i) w += alphabet[rng.index(alphabet.size())];
  return w;
}

}  // namespace

TEST_SUITE("bpe") {
  TEST_CASE("aaab hand simulation") {
    // Pairs: (a,a) x20, (a,b) x10 -> merge (a,a). Then "aa a b": (aa,a) x10,
    // (a,b) x10 tie -> lexicographically smaller left "a" wins.
    const auto table = bpe::learn_bpe({{"aaab", 10}}, 2);
    CHECK(table.merges == std::vector<SymbolPair>{{"a", "a"}, {"a", "b"}});
  }

  TEST_CASE("low/lower hand simulation") {
    // Counts: (l,o)7 (o,w)7 (w,e)2 (e,r)2 -> (l,o). Then (lo,w)7 -> merge.
    // Then (low,e)2 (e,r)2 tie -> "e" < "low".
    const auto table = bpe::learn_bpe({{"low", 5}, {"lower", 2}}, 3);
    CHECK(table.merges == std::vector<SymbolPair>{{"l", "o"}, {"lo", "w"}, {"e", "r"}});
    CHECK(bpe::apply_bpe("lower", table) == Strings{"low@@", "er"});
    CHECK(bpe::apply_bpe("low", table) == Strings{"low"});
  }

  TEST_CASE("stopping rules") {
    CHECK(bpe::learn_bpe({{"abc", 5}}, 0).merges.empty());
    CHECK(bpe::learn_bpe({}, 10).merges.empty());
    // Every pair occurs once: nothing reaches the count of two.
    CHECK(bpe::learn_bpe({{"abcd", 1}}, 10).merges.empty());
  }

  TEST_CASE("character fallback and protected tokens") {
    const MergeTable empty;
    CHECK(bpe::apply_bpe("xyz", empty) == Strings{"x@@", "y@@", "z"});
    const auto table = bpe::learn_bpe({{"<topic64>", 100}, {"topic", 50}}, 20);
    CHECK(bpe::apply_bpe("<topic64>", table) == Strings{"<topic64>"});
    for (const auto& [l, r] : table.merges) {
      CHECK(l.find('<') == std::string::npos);
      CHECK(r.find('>') == std::string::npos);
    }
    CHECK(bpe::is_protected_token("<topic0>"));
    CHECK_FALSE(bpe::is_protected_token("<>"));
    CHECK_FALSE(bpe::is_protected_token("<a b>"));
  }

  TEST_CASE("undo") {
    CHECK(bpe::undo_bpe(Strings{"un@@", "related"}) == "unrelated");
    CHECK(bpe::undo_bpe(Strings{}) == "");
    CHECK(bpe::undo_bpe_sentence(Strings{"un@@", "related", "words"}) ==
          Strings{"unrelated", "words"});
  }

  TEST_CASE("round trip on fuzzed words and tables") {
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
      bpe::WordCounts counts;
      for (int i = 0; i < 30; ++i) counts[random_word(rng)] += 1 + rng.index(20);
      const auto table = bpe::learn_bpe(counts, rng.index(60));
      for (int i = 0; i < 50; ++i) {
        const auto w = random_word(rng);
        CHECK(bpe::undo_bpe(bpe::apply_bpe(w, table)) == w);
      }
    }
  }

  TEST_CASE("determinism and no duplicate merges") {
    Rng rng(4);
    bpe::WordCounts counts;
    for (int i = 0; i < 100; ++i) counts[random_word(rng)] += 1 + rng.index(9);
    const auto a = bpe::learn_bpe(counts, 200);
    const auto b = bpe::learn_bpe(counts, 200);
    CHECK(a == b);
    std::set<SymbolPair> seen(a.merges.begin(), a.merges.end());
    CHECK(seen.size() == a.merges.size());
  }

  TEST_CASE("more merges never lengthen a training word") {
    Rng rng(5);
    bpe::WordCounts counts;
    for (int i = 0; i < 60; ++i) counts[random_word(rng)] += 1 + rng.index(9);
    const auto full = bpe::learn_bpe(counts, 150);
    for (std::size_t k = 0; k + 1 < full.merges.size(); k += 7) {
      const auto small = bpe::learn_bpe(counts, k);
      const auto large = bpe::learn_bpe(counts, k + 1);
      for (const auto& [w, c] : counts) {
        CHECK(bpe::apply_bpe(w, large).size() <= bpe::apply_bpe(w, small).size());
      }
    }
  }

  TEST_CASE("merge table file format") {
    const auto table = bpe::learn_bpe({{"low", 5}, {"lower", 2}}, 3);
    std::stringstream s;
    bpe::write_merge_table(s, table, "cafe");
    CHECK(s.str().rfind("version 1", 0) == 0);
    CHECK(bpe::read_merge_table(s) == table);
    std::stringstream dup("version 1\na b\na b\n");
    CHECK_THROWS_AS(bpe::read_merge_table(dup), Error);
    std::stringstream bad("version 2\n");
    CHECK_THROWS_AS(bpe::read_merge_table(bad), Error);
  }
}
