#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "secmt/error.hpp"
#include "secmt/eval.hpp"

using namespace secmt;
using Strings = std::vector<std::string>;

namespace {

// Independent BLEU over whitespace tokens, used as an oracle.
double oracle_bleu(const Strings& hyps, const Strings& refs) {
  double match[4] = {0, 0, 0, 0};
  double total[4] = {0, 0, 0, 0};
  double hyp_len = 0;
  double ref_len = 0;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    const auto h = text::split_whitespace(hyps[s]);
    const auto r = text::split_whitespace(refs[s]);
    hyp_len += static_cast<double>(h.size());
    ref_len += static_cast<double>(r.size());
    for (std::size_t n = 1; n <= 4; ++n) {
      std::map<Strings, int> hc;
      std::map<Strings, int> rc;
      for (std::size_t i = 0; i + n <= h.size(); ++i) ++hc[Strings(h.begin() + i, h.begin() + i + n)];
      for (std::size_t i = 0; i + n <= r.size(); ++i) ++rc[Strings(r.begin() + i, r.begin() + i + n)];
      for (const auto& [g, c] : hc) {
        total[n - 1] += c;
        match[n - 1] += std::min(c, rc.count(g) ? rc.at(g) : 0);
      }
    }
  }
  double log_sum = 0;
  for (int n = 0; n < 4; ++n) {
    if (match[n] == 0) return 0.0;
    log_sum += std::log(match[n] / total[n]);
  }
  const double bp = hyp_len < ref_len ? std::exp(1 - ref_len / hyp_len) : 1.0;
  return 100.0 * bp * std::exp(log_sum / 4);
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("13a basics") {
    CHECK(eval::tokenize_13a("Hello, world!") == Strings{"Hello", ",", "world", "!"});
    CHECK(eval::tokenize_13a("3.5") == Strings{"3.5"});
  }

  TEST_CASE("13a golden file") {
    std::istringstream in(testing::slurp(testing::data_path("13a_golden.jsonl")));
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
      const auto j = nlohmann::json::parse(line);
      const auto input = j.at("input").get<std::string>();
      CAPTURE(input);
      CHECK(eval::tokenize_13a(input) == j.at("tokens").get<Strings>());
      ++n;
    }
    CHECK(n == 50);
  }

  TEST_CASE("hand-computed toy corpora") {
    const auto a = eval::corpus_bleu(Strings{"a b c d e"}, Strings{"a b c d f"});
    CHECK(a.score == doctest::Approx(100.0 * std::pow(0.2, 0.25)).epsilon(1e-12));
    CHECK(a.precisions[0] == doctest::Approx(0.8));
    CHECK(a.precisions[3] == doctest::Approx(0.5));

    const auto b = eval::corpus_bleu(Strings{"a b c d", "x y z w v"},
                                     Strings{"a b c d e f", "x y z w v"});
    CHECK(b.brevity_penalty == doctest::Approx(std::exp(-2.0 / 9.0)).epsilon(1e-12));
    CHECK(b.score == doctest::Approx(100.0 * std::exp(-2.0 / 9.0)).epsilon(1e-12));
    CHECK(b.hyp_len == 9);
    CHECK(b.ref_len == 11);

    const auto c = eval::corpus_bleu(Strings{"a a a b c d", "p q r s"},
                                     Strings{"a b c d a x", "p q r s"});
    CHECK(c.precisions[0] == doctest::Approx(0.9));
    CHECK(c.score == doctest::Approx(100.0 * std::pow(0.225, 0.25)).epsilon(1e-12));
  }

  TEST_CASE("identity and disjoint corpora") {
    const Strings refs{"the cat sat on the mat .", "a dog barked loudly at night"};
    const auto id = eval::corpus_bleu(refs, refs);
    CHECK(id.score == 100.0);
    CHECK(id.brevity_penalty == 1.0);
    CHECK(eval::corpus_bleu(Strings{"x y z"}, Strings{"a b c"}).score == 0.0);
  }

  TEST_CASE("errors on empty or mismatched input") {
    CHECK_THROWS_AS(eval::corpus_bleu(Strings{}, Strings{}), Error);
    CHECK_THROWS_AS(eval::corpus_bleu(Strings{"a"}, Strings{"a", "b"}), Error);
    CHECK_THROWS_AS(eval::bootstrap_significance(Strings{"a"}, Strings{"a"}, Strings{"a"}, 99, 1),
                    Error);
  }

  TEST_CASE("BLEU is invariant to sentence order") {
    Strings h{"a b c d e", "x y z", "p q r s t u"};
    Strings r{"a b c d f", "x y w", "p q r s t"};
    const double s1 = eval::corpus_bleu(h, r).score;
    std::swap(h[0], h[2]);
    std::swap(r[0], r[2]);
    CHECK(eval::corpus_bleu(h, r).score == doctest::Approx(s1).epsilon(1e-12));
  }

  TEST_CASE("bootstrap under identity and strict dominance") {
    Strings refs;
    Strings wrong;
    for (int i = 0; i < 50; ++i) {
      refs.push_back("w" + std::to_string(i) + " a b c d e f");
      wrong.push_back("z y x v u t s");
    }
    const auto same = eval::bootstrap_significance(refs, refs, refs, 1000, 4);
    CHECK(same.p_value == 1.0);
    const auto dom = eval::bootstrap_significance(refs, wrong, refs, 1000, 4);
    CHECK(dom.p_value < 0.01);
    CHECK_FALSE(dom.reversed);
    const auto rev = eval::bootstrap_significance(wrong, refs, refs, 1000, 4);
    CHECK(rev.reversed);
    CHECK(rev.p_value < 0.01);
  }

  TEST_CASE("bootstrap p-value matches enumeration over frozen resamples") {
    Strings refs;
    Strings a;
    Strings b;
    for (int i = 0; i < 20; ++i) {
      const std::string w = "s" + std::to_string(i);
      refs.push_back(w + " the quick brown fox jumps");
      // Mixed wins: a is right on 12 sentences, b on 8 others.
      a.push_back(i % 5 < 3 ? refs.back() : w + " a slow red dog sits");
      b.push_back(i % 5 >= 3 ? refs.back() : w + " a slow red cat naps");
    }
    const auto resamples = eval::draw_resamples(20, 300, 11);
    REQUIRE(resamples.size() == 300);
    const double full_a = oracle_bleu(a, refs);
    const double full_b = oracle_bleu(b, refs);
    REQUIRE(full_a > full_b);
    int not_better = 0;
    for (const auto& idx : resamples) {
      Strings ra, rb, rr;
      for (auto i : idx) {
        ra.push_back(a[i]);
        rb.push_back(b[i]);
        rr.push_back(refs[i]);
      }
      not_better += oracle_bleu(ra, rr) - oracle_bleu(rb, rr) <= 0.0;
    }
    const auto result = eval::bootstrap_significance(a, b, refs, 300, 11);
    CHECK_FALSE(result.reversed);
    CHECK(result.p_value == doctest::Approx(not_better / 300.0));
    CHECK(result.bleu_a == doctest::Approx(full_a));
  }

  TEST_CASE("bootstrap is deterministic and bounded") {
    const Strings refs{"a b c d", "e f g h", "i j k l", "m n o p"};
    const Strings a{"a b c d", "e f g x", "i j k l", "m n x p"};
    const Strings b{"a b x d", "e f g h", "i x k l", "m n o p"};
    const auto r1 = eval::bootstrap_significance(a, b, refs, 200, 8);
    const auto r2 = eval::bootstrap_significance(a, b, refs, 200, 8);
    CHECK(r1.p_value == r2.p_value);
    CHECK((r1.p_value >= 0.0 && r1.p_value <= 1.0));
  }

  TEST_CASE("report lines are key: value") {
    const auto text = eval::format_report(eval::corpus_bleu(Strings{"a b c d"}, Strings{"a b c d"}));
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) CHECK(line.find(": ") != std::string::npos);
    CHECK(text.find("bleu: 100") != std::string::npos);
  }
}
