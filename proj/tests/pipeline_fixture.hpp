#pragma once

// A small synthetic corpus and a config sized to run every stage in seconds.

#include <filesystem>
#include <fstream>

#include "secmt/artifact.hpp"
#include "secmt/corpus.hpp"
#include "secmt/pipeline.hpp"
#include "secmt/synth.hpp"

namespace fixture {

inline secmt::pipeline::PipelineConfig small_pipeline(const std::filesystem::path& dir,
                                                      std::uint64_t seed = 1) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  secmt::synth::SynthOptions options;
  options.biographies = 14;
  options.other_documents = 2;
  options.seed = seed;
  const auto corpus = secmt::synth::generate(options);
  {
    std::ofstream out(dir / "source.jsonl");
    secmt::write_raw_documents(out, corpus.source);
  }
  {
    std::ofstream out(dir / "target.jsonl");
    secmt::write_raw_documents(out, corpus.target);
  }
  {
    std::ofstream out(dir / "lexicon.tsv");
    secmt::synth::write_lexicon(out, corpus.lexicon);
  }
  secmt::pipeline::PipelineConfig c;
  c.seed = seed;
  c.work_dir = dir / "work";
  c.source_input = dir / "source.jsonl";
  c.target_input = dir / "target.jsonl";
  c.lexicon = dir / "lexicon.tsv";
  c.bpe_merges = 150;
  c.lda.topics = 4;
  c.lda.iterations = 40;
  c.infer_iterations = 20;
  c.topic_cache_capacity = 15;
  c.dynamic_cache_capacity = 15;
  c.scorer.embedding_dim = 6;
  c.scorer.score_hidden = {8};
  c.scorer.gate_hidden = {4};
  c.learning_rate = 0.1;
  c.epochs = 1;
  c.test_fraction = 0.25;
  c.bootstrap_resamples = 100;
  return c;
}

}  // namespace fixture
