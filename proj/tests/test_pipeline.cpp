#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "helpers.hpp"
#include "pipeline_fixture.hpp"
#include "secmt/error.hpp"
#include "secmt/pipeline.hpp"
#include "secmt/sideconstraints.hpp"

using namespace secmt;
using namespace secmt::pipeline;
namespace fs = std::filesystem;

TEST_SUITE("pipeline") {
  TEST_CASE("defaults") {
    const PipelineConfig c;
    CHECK(c.bpe_merges == 8000);
    CHECK(c.lda.topics == 100);
    CHECK(c.lda.alpha == 0.001);
    CHECK(c.lda.beta == 0.01);
    CHECK(c.lda.iterations == 1000);
    CHECK(c.infer_iterations == 100);
    CHECK(c.topic_cache_capacity == 100);
    CHECK(c.dynamic_cache_capacity == 100);
    CHECK(c.scorer.embedding_dim == 512);
    CHECK(c.scorer.score_hidden == std::vector<std::size_t>{1000, 500});
    CHECK(c.scorer.gate_hidden == std::vector<std::size_t>{500, 200});
    CHECK(c.bootstrap_resamples == 1000);
    CHECK(c.lda.granularity == topics::Granularity::section);
  }

  TEST_CASE("config json round trip") {
    PipelineConfig c;
    c.lda.topics = 7;
    c.scorer.score_hidden = {3, 2};
    const auto back = parse_config(config_to_json(c));
    CHECK(config_to_json(back) == config_to_json(c));
  }

  TEST_CASE("unknown keys and wrong types are config errors") {
    auto kind = [](const std::string& text) {
      try {
        parse_config(text).validate();
      } catch (const Error& e) {
        return e.kind();
      }
      return ErrorKind::invariant;
    };
    CHECK(kind(R"({"lda": {"topicz": 3}})") == ErrorKind::config);
    CHECK(kind(R"({"lda": {"topics": "many"}})") == ErrorKind::config);
    CHECK(kind(R"({"bogus": 1})") == ErrorKind::config);
    CHECK(kind("{not json") == ErrorKind::config);
    CHECK(kind(R"({"lda": {"topics": 0}})") == ErrorKind::config);
  }

  TEST_CASE("dotted overrides") {
    PipelineConfig c;
    set_config_value(c, "lda.topics", "20");
    set_config_value(c, "lda.granularity", "document");
    set_config_value(c, "scorer.score_hidden", "[4,2]");
    CHECK(c.lda.topics == 20);
    CHECK(c.lda.granularity == topics::Granularity::document);
    CHECK(c.scorer.score_hidden == std::vector<std::size_t>{4, 2});
    CHECK_THROWS_AS(set_config_value(c, "lda.nope", "1"), Error);
    CHECK_THROWS_AS(set_config_value(c, "lda.granularity", "paragraph"), Error);
  }

  TEST_CASE("relative paths resolve against the config directory") {
    const auto c = parse_config(R"({"inputs": {"source": "a.jsonl"}, "work_dir": "w"})", {}, "/x/y");
    CHECK(c.source_input == fs::path("/x/y/a.jsonl"));
    CHECK(c.work_dir == fs::path("/x/y/w"));
  }

  TEST_CASE("hash ignores paths but not settings") {
    PipelineConfig a;
    PipelineConfig b;
    b.work_dir = "/elsewhere";
    b.source_input = "other.jsonl";
    CHECK(config_hash(a) == config_hash(b));
    b.lda.topics = 3;
    CHECK(config_hash(a) != config_hash(b));
  }

  TEST_CASE("module seeds differ and follow the global seed") {
    const auto s = module_seeds(5);
    const std::set<std::uint64_t> all{s.lda_source, s.lda_target, s.inference, s.base_model,
                                      s.scorer,     s.schedule,   s.shuffle,   s.bootstrap};
    CHECK(all.size() == 8);
    CHECK(module_seeds(6).lda_source != s.lda_source);
  }

  TEST_CASE("test split") {
    std::vector<std::string> ids;
    for (int i = 0; i < 10; ++i) ids.push_back("d" + std::to_string(i));
    const auto t = test_documents(ids, 0.2, 4);
    CHECK(t.size() == 2);
    CHECK(t == test_documents(ids, 0.2, 4));
    CHECK(test_documents(ids, 0.01, 4).size() == 1);
    CHECK(test_documents(ids, 0.99, 4).size() == 9);
    CHECK(test_documents(std::vector<std::string>{"only"}, 0.5, 1).empty());
  }

  TEST_CASE("unknown stage and missing inputs") {
    PipelineConfig c;
    c.work_dir = testing::scratch_dir("pipeline_missing");
    CHECK_THROWS_AS(run_stage("translate", c), Error);
    try {
      run_stage("ingest", c);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::config);
    }
  }

  TEST_CASE("stages write tagged output and a manifest") {
    const auto dir = testing::scratch_dir("pipeline_stages");
    const auto c = fixture::small_pipeline(dir);
    for (const auto& stage : stage_names()) {
      run_stage(stage, c);
      if (stage == "tag") break;
    }
    std::ifstream in(c.work_dir / "tagged/source.words.jsonl");
    const auto tagged = read_corpus(in);
    std::size_t sentences = 0;
    for (const auto& doc : tagged) {
      for (const auto& section : doc.sections) {
        std::optional<std::size_t> topic;
        for (const auto& s : section.sentences) {
          const auto u = sideconstraints::untag(s.text);
          REQUIRE(u.topic.has_value());
          CHECK(*u.topic < c.lda.topics);
          if (topic) CHECK(*topic == *u.topic);
          topic = u.topic;
          CHECK(s.tokens.front() == sideconstraints::topic_tag(*u.topic));
          ++sentences;
        }
      }
    }
    CHECK(sentences > 0);
    const auto manifest = nlohmann::json::parse(testing::slurp(c.work_dir / "manifest.json"));
    CHECK(manifest.at("config") == config_hash(c));
    CHECK(manifest.at("stages").size() == 10);
  }

  TEST_CASE("train-lda is deterministic") {
    const auto dir = testing::scratch_dir("pipeline_lda");
    auto c = fixture::small_pipeline(dir);
    for (const auto& stage : {"ingest", "filter-bio", "align-sents", "clean", "learn-bpe",
                              "apply-bpe", "train-lda"}) {
      run_stage(stage, c);
    }
    const auto first = testing::slurp(c.work_dir / "topics/source.model");
    run_stage("train-lda", c);
    CHECK(testing::slurp(c.work_dir / "topics/source.model") == first);
  }
}
