#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>

#include "helpers.hpp"
#include "secmt/artifact.hpp"
#include "secmt/error.hpp"
#include "secmt/random.hpp"
#include "secmt/resources.hpp"
#include "secmt/text.hpp"

using namespace secmt;

TEST_SUITE("text") {
  TEST_CASE("utf8 round trip") {
    const std::string s = "Café Ångström Българският 中文 😀";
    CHECK(text::encode_utf8(text::decode_utf8(s)) == s);
    CHECK(text::utf8_chars("aé中").size() == 3);
  }

  TEST_CASE("case folding covers accented, Greek and Cyrillic letters") {
    CHECK(text::to_lower("ÉCOLE") == "école");
    CHECK(text::to_lower("ΑΘΗΝΑ") == "αθηνα");
    CHECK(text::to_lower("БЪЛГАРИЯ") == "българия");
    CHECK(text::to_lower("中文") == "中文");
  }

  TEST_CASE("whitespace helpers") {
    CHECK(text::trim("  a b \t\n") == "a b");
    CHECK(text::split_whitespace(" a  b\tc\n") == std::vector<std::string>{"a", "b", "c"});
    CHECK(text::normalize_whitespace(" a \n b ") == "a b");
    CHECK(text::join({"a", "b"}, "-") == "a-b");
    CHECK(text::iequals("Biography", "BIOGRAPHY"));
    CHECK_FALSE(text::iequals("Biography", "Biographies"));
  }

  TEST_CASE("punctuation tokens") {
    CHECK(text::is_punctuation_token("."));
    CHECK(text::is_punctuation_token("«"));
    CHECK(text::is_punctuation_token("..."));
    CHECK_FALSE(text::is_punctuation_token("a."));
    CHECK_FALSE(text::is_punctuation_token(""));
  }
}

TEST_SUITE("artifact") {
  TEST_CASE("shortest round-trip doubles") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
      const double x = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng.index(40)) - 20);
      CHECK(parse_double(format_double(x)) == x);
    }
    CHECK(format_double(0.001) == "0.001");
    CHECK_THROWS_AS(parse_double("abc"), Error);
    CHECK_THROWS_AS(parse_uint("-1"), Error);
  }

  TEST_CASE("fnv1a64 known values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(hex64(0xabcULL) == "0000000000000abc");
  }

  TEST_CASE("atomic file leaves nothing behind unless committed") {
    const auto dir = testing::scratch_dir("atomic");
    {
      AtomicFile f(dir / "sub" / "a.txt");
      f.stream() << "partial";
    }
    CHECK_FALSE(std::filesystem::exists(dir / "sub" / "a.txt"));
    CHECK_FALSE(std::filesystem::exists(dir / "sub" / "a.txt.partial"));
    {
      AtomicFile f(dir / "sub" / "a.txt");
      f.stream() << "done";
      f.commit();
    }
    CHECK(testing::slurp(dir / "sub" / "a.txt") == "done");
  }

  TEST_CASE("missing input is a config error") {
    try {
      read_file("/nonexistent/secmt/file");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::config);
    }
  }

  TEST_CASE("error kinds map to exit codes") {
    CHECK(exit_code(ErrorKind::config) == 2);
    CHECK(exit_code(ErrorKind::data) == 3);
    CHECK(exit_code(ErrorKind::input) == 3);
    CHECK(exit_code(ErrorKind::invariant) == 4);
  }

  TEST_CASE("rng streams are reproducible") {
    Rng a(derive_seed(9, 1));
    Rng b(derive_seed(9, 1));
    Rng c(derive_seed(9, 2));
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
      const auto x = a.next();
      CHECK(x == b.next());
      differs |= x != c.next();
    }
    CHECK(differs);
    Rng r(3);
    for (int i = 0; i < 1000; ++i) {
      const double u = r.uniform();
      CHECK((u >= 0.0 && u < 1.0));
      CHECK(r.index(7) < 7);
    }
  }

  TEST_CASE("shipped word lists load") {
    CHECK(stopwords("en").count("the"));
    CHECK(stopwords("fr").count("le"));
    CHECK(abbreviations("en").count("dr"));
    CHECK(retained_exceptions("en").count("was"));
    CHECK(stopwords("xx").empty());
    CHECK(default_biography_keywords().size() == 8);
  }
}
