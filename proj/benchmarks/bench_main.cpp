#include <benchmark/benchmark.h>

#include <memory>
#include <string>
#include <vector>

#include "secmt/bpe.hpp"
#include "secmt/eval.hpp"
#include "secmt/neural.hpp"
#include "secmt/random.hpp"
#include "secmt/topics.hpp"

using namespace secmt;

namespace {

std::vector<std::string> random_words(std::size_t n, std::size_t vocab, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(rng.index(vocab)));
  return out;
}

std::vector<topics::Unit> random_units(std::size_t units, std::size_t length) {
  std::vector<topics::Unit> out;
  for (std::size_t u = 0; u < units; ++u) {
    out.push_back({{"d" + std::to_string(u), std::nullopt}, random_words(length, 2000, u + 1)});
  }
  return out;
}

void BM_LdaSweep(benchmark::State& state) {
  const auto units = random_units(200, 60);
  topics::LdaConfig config;
  config.topics = static_cast<std::size_t>(state.range(0));
  config.iterations = 1;
  for (auto _ : state) benchmark::DoNotOptimize(topics::train_lda(units, config));
  state.SetItemsProcessed(state.iterations() * 200 * 60);
}
BENCHMARK(BM_LdaSweep)->Arg(10)->Arg(100);

bpe::WordCounts word_counts() {
  bpe::WordCounts counts;
  Rng rng(3);
  const std::string letters = "abcdefghijklmnop";
  for (int i = 0; i < 3000; ++i) {
    std::string w;
    const std::size_t len = 3 + rng.index(8);
    for (std::size_t j = 0; j < len; ++j) w += letters[rng.index(letters.size())];
    counts[w] += 1 + rng.index(20);
  }
  return counts;
}

void BM_BpeLearn(benchmark::State& state) {
  const auto counts = word_counts();
  for (auto _ : state) {
    benchmark::DoNotOptimize(bpe::learn_bpe(counts, static_cast<std::size_t>(state.range(0))));
  }
}
BENCHMARK(BM_BpeLearn)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_BpeApply(benchmark::State& state) {
  const auto counts = word_counts();
  const bpe::Segmenter seg(bpe::learn_bpe(counts, 1000));
  std::vector<std::string> words;
  for (const auto& [w, c] : counts) words.push_back(w);
  for (auto _ : state) benchmark::DoNotOptimize(seg.segment_sentence(words));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(words.size()));
}
BENCHMARK(BM_BpeApply);

void BM_ScorerStep(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const std::size_t vocab = 2000;
  Rng rng(5);
  auto emb = std::make_shared<neural::EmbeddingTable>(neural::EmbeddingTable::Random(
      static_cast<Eigen::Index>(vocab), static_cast<Eigen::Index>(d)));
  neural::ScorerConfig config;
  config.embedding_dim = d;
  config.score_hidden = {2 * d, d};
  config.gate_hidden = {d, d / 2};
  auto params = neural::init_params(config, emb);
  std::vector<neural::TrainingExample> batch(16);
  for (auto& ex : batch) {
    const auto n = static_cast<Eigen::Index>(d);
    ex.context = {neural::Vector::Random(n), neural::Vector::Random(n), neural::Vector::Random(n)};
    for (std::size_t i = 0; i < 200; ++i) ex.cache_ids.push_back(i * 7 % vocab);
    ex.p_nmt = neural::Vector::Constant(static_cast<Eigen::Index>(vocab), 1.0 / vocab);
    ex.gold = ex.cache_ids[rng.index(ex.cache_ids.size())];
  }
  for (auto _ : state) benchmark::DoNotOptimize(neural::train_step(params, batch, 0.01));
}
BENCHMARK(BM_ScorerStep)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_CorpusBleu(benchmark::State& state) {
  std::vector<std::string> hyps;
  std::vector<std::string> refs;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    std::string h;
    std::string r;
    for (const auto& w : random_words(25, 300, 2 * i + 1)) h += w + " ";
    for (const auto& w : random_words(25, 300, 2 * i + 2)) r += w + " ";
    hyps.push_back(h);
    refs.push_back(r);
  }
  for (auto _ : state) benchmark::DoNotOptimize(eval::corpus_bleu(hyps, refs));
}
BENCHMARK(BM_CorpusBleu)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
