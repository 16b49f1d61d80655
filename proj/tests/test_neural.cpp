#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gradcheck.hpp"
#include "secmt/error.hpp"
#include "secmt/neural.hpp"

using namespace secmt;
using namespace secmt::neural;

namespace {

// Plain-loop reference for one network input.
double mlp(const FeedForward& net, const std::vector<double>& input) {
  std::vector<double> a = input;
  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    std::vector<double> z(static_cast<std::size_t>(layers[l].weights.rows()));
    for (std::size_t i = 0; i < z.size(); ++i) {
      double sum = layers[l].bias(static_cast<Eigen::Index>(i));
      for (std::size_t j = 0; j < a.size(); ++j) {
        sum += layers[l].weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * a[j];
      }
      z[i] = l + 1 < layers.size() ? std::tanh(sum) : sum;
    }
    a = z;
  }
  return a[0];
}

std::vector<double> as_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

std::vector<double> concat(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

CacheScorerParams zero_params(std::size_t d, std::size_t vocab) {
  ScorerConfig c;
  c.embedding_dim = d;
  c.score_hidden = {3};
  c.gate_hidden = {2};
  auto p = init_params(c, std::make_shared<EmbeddingTable>(EmbeddingTable::Ones(
                              static_cast<Eigen::Index>(vocab), static_cast<Eigen::Index>(d))));
  p.score_net = FeedForward::zeros(4 * d, c.score_hidden);
  p.gate_net = FeedForward::zeros(3 * d, c.gate_hidden);
  return p;
}

}  // namespace

TEST_SUITE("neural") {
  TEST_CASE("combine example") {
    const auto p = combine(vec({.1, .2, .3, .4}), vec({.5, .5}), std::vector<std::size_t>{2, 3}, 0.3);
    CHECK(p(0) == doctest::Approx(.03));
    CHECK(p(1) == doctest::Approx(.06));
    CHECK(p(2) == doctest::Approx(.44));
    CHECK(p(3) == doctest::Approx(.47));
    CHECK(p.sum() == doctest::Approx(1.0));
  }

  TEST_CASE("combine rejects duplicate and unknown ids") {
    CHECK_THROWS_AS(combine(vec({.5, .5}), vec({.5, .5}), std::vector<std::size_t>{1, 1}, .5), Error);
    CHECK_THROWS_AS(combine(vec({.5, .5}), vec({1.0}), std::vector<std::size_t>{2}, .5), Error);
    CHECK_THROWS_AS(combine(vec({.5, .5}), vec({1.0}), std::vector<std::size_t>{0, 1}, .5), Error);
  }

  TEST_CASE("softmax") {
    const auto p = cache_distribution(vec({std::log(1.0), std::log(3.0)}));
    CHECK(p(0) == doctest::Approx(.25));
    CHECK(p(1) == doctest::Approx(.75));
    const auto big = cache_distribution(vec({1000.0, 1000.0}));
    CHECK(big(0) == doctest::Approx(.5));
  }

  TEST_CASE("zero networks give flat scores and an even gate") {
    auto p = zero_params(2, 5);
    const DecoderContext ctx{vec({1, 2}), vec({3, 4}), vec({5, 6})};
    const std::vector<std::size_t> ids{0, 3, 4};
    const auto s = score_cache(p, ctx, ids);
    REQUIRE(s.has_value());
    CHECK(s->cwiseAbs().maxCoeff() == 0.0);
    CHECK(gate(p, ctx) == doctest::Approx(0.5));
    const auto pred = predict(p, ctx, ids, Vector::Constant(5, 0.2));
    CHECK(pred(3) == doctest::Approx(0.5 * 0.2 + 0.5 / 3.0));
    CHECK(pred(1) == doctest::Approx(0.1));
  }

  TEST_CASE("empty cache falls back to the base distribution") {
    auto p = zero_params(2, 3);
    const DecoderContext ctx{vec({1, 2}), vec({3, 4}), vec({5, 6})};
    CHECK_FALSE(score_cache(p, ctx, {}).has_value());
    const Vector base = vec({.2, .3, .5});
    CHECK(predict(p, ctx, {}, base) == base);
  }

  TEST_CASE("forward pass matches a loop implementation") {
    auto s = gradcheck::make_setup(3, 2, {2, 2}, {2, 2}, 4, 1);
    const auto& ex = s.batch.front();
    const auto ctx = as_vector(ex.context.concat());
    const auto scores = score_cache(s.params, ex.context, ex.cache_ids);
    REQUIRE(scores.has_value());
    for (std::size_t i = 0; i < ex.cache_ids.size(); ++i) {
      const auto emb = as_vector(s.params.embeddings->row(
          static_cast<Eigen::Index>(ex.cache_ids[i])).transpose());
      CHECK((*scores)(static_cast<Eigen::Index>(i)) ==
            doctest::Approx(mlp(s.params.score_net, concat(ctx, emb))));
    }
    const double g = 1.0 / (1.0 + std::exp(-mlp(s.params.gate_net, ctx)));
    CHECK(gate(s.params, ex.context) == doctest::Approx(g));
  }

  TEST_CASE("context dimension mismatch is an input error") {
    auto p = zero_params(2, 3);
    const DecoderContext bad{vec({1}), vec({3, 4}), vec({5, 6})};
    CHECK_THROWS_AS(gate(p, bad), Error);
  }

  TEST_CASE("analytic gradients match finite differences") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto s = gradcheck::make_setup(seed, 4, {8, 4}, {4, 2}, 7, 3);
      CHECK(gradcheck::max_relative_error(s) < 1e-4);
    }
  }

  TEST_CASE("a gradient step lowers the loss") {
    auto s = gradcheck::make_setup(9, 4, {8, 4}, {4, 2}, 7, 8);
    const double before = mean_loss(s.params, s.batch);
    const double reported = train_step(s.params, s.batch, 0.05);
    CHECK(reported == doctest::Approx(before));
    CHECK(mean_loss(s.params, s.batch) < before);
  }

  TEST_CASE("zero learning rate changes nothing and negative is rejected") {
    auto s = gradcheck::make_setup(4, 4, {8, 4}, {4, 2}, 7, 4);
    const auto score0 = s.params.score_net.layers()[0].weights;
    const EmbeddingTable emb0 = *s.params.embeddings;
    train_step(s.params, s.batch, 0.0);
    CHECK(s.params.score_net.layers()[0].weights == score0);
    CHECK(*s.params.embeddings == emb0);
    CHECK_THROWS_AS(train_step(s.params, s.batch, -1.0), Error);
  }

  TEST_CASE("frozen embeddings stay put") {
    auto s = gradcheck::make_setup(5, 4, {8, 4}, {4, 2}, 7, 4);
    s.params.config.freeze_embeddings = true;
    const EmbeddingTable emb0 = *s.params.embeddings;
    const auto score0 = s.params.score_net.layers()[0].weights;
    train_step(s.params, s.batch, 0.1);
    CHECK(*s.params.embeddings == emb0);
    CHECK(s.params.score_net.layers()[0].weights != score0);
  }

  TEST_CASE("base distribution is never touched by training") {
    auto s = gradcheck::make_setup(6, 4, {8, 4}, {4, 2}, 7, 4);
    const Vector p0 = s.batch[0].p_nmt;
    train_step(s.params, s.batch, 0.1);
    CHECK(s.batch[0].p_nmt == p0);
  }

  TEST_CASE("cache order does not change the scattered distribution") {
    auto s = gradcheck::make_setup(7, 4, {8, 4}, {4, 2}, 7, 1);
    auto ex = s.batch.front();
    const auto p = predict(s.params, ex.context, ex.cache_ids, ex.p_nmt);
    std::reverse(ex.cache_ids.begin(), ex.cache_ids.end());
    const auto q = predict(s.params, ex.context, ex.cache_ids, ex.p_nmt);
    CHECK((p - q).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(p.sum() == doctest::Approx(1.0));
  }

  TEST_CASE("a larger gate weights the base model more") {
    const Vector base = vec({.7, .1, .1, .1});
    const Vector cache = vec({1.0});
    const std::vector<std::size_t> ids{3};
    double last = -1.0;
    for (double g : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const double p0 = combine(base, cache, ids, g)(0);
      CHECK(p0 > last);
      last = p0;
    }
  }

  TEST_CASE("config validation") {
    ScorerConfig c;
    c.embedding_dim = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.score_hidden = {0};
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    auto wrong = std::make_shared<EmbeddingTable>(EmbeddingTable::Zero(3, 5));
    c.embedding_dim = 4;
    CHECK_THROWS_AS(init_params(c, wrong), Error);
  }

  TEST_CASE("mock bigram matches counted frequencies") {
    MockBaseModel m(5, 3, 11);
    const std::vector<std::vector<std::size_t>> sentences{{1, 2, 3}, {1, 2, 4}, {2, 3}};
    m.fit(sentences);
    // counts after BOS: 1 twice, 2 once; after 2: 3 twice, 4 once.
    CHECK(m.bigram_probability(0, 1) == doctest::Approx(3.0 / 8.0));
    CHECK(m.bigram_probability(0, 2) == doctest::Approx(2.0 / 8.0));
    CHECK(m.bigram_probability(2, 3) == doctest::Approx(3.0 / 8.0));
    CHECK(m.bigram_probability(4, 1) == doctest::Approx(1.0 / 5.0));
    const std::vector<std::size_t> history{1, 2};
    const std::vector<std::string> source{"un", "mot"};
    const auto out = m(history, source);
    CHECK(out.p_nmt.sum() == doctest::Approx(1.0));
    CHECK(out.p_nmt(3) == doctest::Approx(3.0 / 8.0));
    CHECK(out.context.valid(3));
    const auto again = m(history, source);
    CHECK(again.context.concat() == out.context.concat());
  }

  TEST_CASE("topic schedule has the exact gold share") {
    for (std::size_t n : {0u, 1u, 7u, 10u, 101u}) {
      const auto s = topic_schedule(n, 0.5, 3);
      const auto gold = static_cast<std::size_t>(std::count(s.begin(), s.end(), TopicSource::gold));
      CHECK(gold == static_cast<std::size_t>(std::llround(0.5 * static_cast<double>(n))));
    }
    CHECK(topic_schedule(50, 0.3, 8) == topic_schedule(50, 0.3, 8));
    CHECK(topic_schedule(50, 0.3, 8) != topic_schedule(50, 0.3, 9));
    CHECK_THROWS_AS(topic_schedule(5, 1.5, 1), Error);
  }

  TEST_CASE("checkpoint round trip") {
    auto s = gradcheck::make_setup(8, 4, {8, 4}, {4, 2}, 7, 1);
    std::stringstream a;
    write_checkpoint(a, s.params, "abc");
    const auto back = read_checkpoint(a);
    CHECK(*back.embeddings == *s.params.embeddings);
    CHECK(back.score_net.layers()[1].weights == s.params.score_net.layers()[1].weights);
    CHECK(back.gate_net.layers()[2].bias == s.params.gate_net.layers()[2].bias);
    std::stringstream b;
    write_checkpoint(b, back, "abc");
    CHECK(a.str() == b.str());
    std::stringstream broken("secmt-cache-scorer 1\nnonsense\n");
    CHECK_THROWS_AS(read_checkpoint(broken), Error);
  }
}
