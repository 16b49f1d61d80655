#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "secmt/corpus.hpp"
#include "secmt/neural.hpp"
#include "secmt/topics.hpp"

namespace secmt::pipeline {

// Every module seed is the global seed plus a fixed offset.
struct ModuleSeeds {
  std::uint64_t lda_source = 0;
  std::uint64_t lda_target = 0;
  std::uint64_t inference = 0;
  std::uint64_t base_model = 0;
  std::uint64_t scorer = 0;
  std::uint64_t schedule = 0;
  std::uint64_t shuffle = 0;
  std::uint64_t bootstrap = 0;
};

ModuleSeeds module_seeds(std::uint64_t seed);

struct PipelineConfig {
  std::uint64_t seed = 1;
  std::filesystem::path work_dir = "work";
  std::filesystem::path source_input;  // raw documents, one JSON object per line
  std::filesystem::path target_input;
  std::filesystem::path lexicon;       // optional "source<TAB>target" word pivot
  std::string source_lang = "fr";
  std::string target_lang = "en";

  std::vector<std::string> biography_keywords = default_biography_keywords();
  CleaningOptions cleaning;
  AlignOptions alignment;

  std::size_t bpe_merges = 8000;

  topics::LdaConfig lda;  // lda.seed is replaced by the derived module seed
  std::size_t infer_iterations = 100;

  std::size_t topic_cache_capacity = 100;
  std::size_t dynamic_cache_capacity = 100;

  neural::ScorerConfig scorer;  // scorer.seed is replaced by the derived module seed
  double learning_rate = 0.05;
  std::size_t epochs = 1;
  std::size_t batch_size = 16;
  double gold_topic_ratio = 0.5;

  double test_fraction = 0.2;
  std::size_t bootstrap_resamples = 1000;

  // Parameter checks only; input files are checked by the stages that read them.
  void validate() const;
};

// Applies a JSON config document on top of base. Unknown keys are errors.
// Relative paths are resolved against base_dir when it is non-empty.
PipelineConfig parse_config(std::string_view json_text, PipelineConfig base = {},
                            const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

// Sets one dotted key, e.g. ("lda.topics", "20"). The value is read as JSON
// and falls back to a plain string.
void set_config_value(PipelineConfig& config, std::string_view key,
                      std::string_view value);

std::string config_to_json(const PipelineConfig& config);
// Hash of every setting that can change an artifact; paths are excluded.
std::string config_hash(const PipelineConfig& config);

const std::vector<std::string>& stage_names();

using LogSink = std::function<void(std::string_view)>;

void run_stage(std::string_view stage, const PipelineConfig& config,
               const LogSink& log = {});
void run_all(const PipelineConfig& config, const LogSink& log = {});

// Documents held out for cache-run and eval; the rest train the scorer.
std::vector<std::string> test_documents(std::span<const std::string> doc_ids,
                                        double fraction, std::uint64_t seed);

}  // namespace secmt::pipeline
