#include "secmt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "secmt/artifact.hpp"
#include "secmt/bpe.hpp"
#include "secmt/cache.hpp"
#include "secmt/error.hpp"
#include "secmt/eval.hpp"
#include "secmt/random.hpp"
#include "secmt/sideconstraints.hpp"
#include "secmt/text.hpp"
#include "secmt/xalign.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace secmt::pipeline {

ModuleSeeds module_seeds(std::uint64_t seed) {
  return {seed + 101, seed + 102, seed + 103, seed + 104,
          seed + 105, seed + 106, seed + 107, seed + 108};
}

// --- configuration -------------------------------------------------------

void PipelineConfig::validate() const {
  cleaning.validate();
  lda.validate();
  scorer.validate();
  if (!(alignment.skip_penalty >= 0.0)) {
    fail(ErrorKind::config, "corpus.skip_penalty must be non-negative");
  }
  if (biography_keywords.empty()) {
    fail(ErrorKind::config, "corpus.biography_keywords must not be empty");
  }
  if (infer_iterations == 0) fail(ErrorKind::config, "lda.infer_iterations must be positive");
  if (topic_cache_capacity == 0 || dynamic_cache_capacity == 0) {
    fail(ErrorKind::config, "cache capacities must be positive");
  }
  if (!(learning_rate > 0.0)) fail(ErrorKind::config, "scorer.learning_rate must be positive");
  if (batch_size == 0) fail(ErrorKind::config, "scorer.batch_size must be positive");
  if (!(gold_topic_ratio >= 0.0 && gold_topic_ratio <= 1.0)) {
    fail(ErrorKind::config, "scorer.gold_topic_ratio must lie in [0, 1]");
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    fail(ErrorKind::config, "eval.test_fraction must lie in (0, 1)");
  }
  if (bootstrap_resamples < 100) {
    fail(ErrorKind::config, "eval.bootstrap_resamples must be at least 100");
  }
}

namespace {

json to_json(const PipelineConfig& c) {
  return {
      {"seed", c.seed},
      {"work_dir", c.work_dir.string()},
      {"inputs",
       {{"source", c.source_input.string()},
        {"target", c.target_input.string()},
        {"lexicon", c.lexicon.string()}}},
      {"languages", {{"source", c.source_lang}, {"target", c.target_lang}}},
      {"corpus",
       {{"biography_keywords", c.biography_keywords},
        {"min_len", c.cleaning.min_len},
        {"max_len", c.cleaning.max_len},
        {"max_ratio", c.cleaning.max_ratio},
        {"skip_penalty", c.alignment.skip_penalty}}},
      {"bpe", {{"merges", c.bpe_merges}}},
      {"lda",
       {{"topics", c.lda.topics},
        {"alpha", c.lda.alpha},
        {"beta", c.lda.beta},
        {"iterations", c.lda.iterations},
        {"burn_in", c.lda.burn_in},
        {"granularity", std::string(topics::to_string(c.lda.granularity))},
        {"infer_iterations", c.infer_iterations}}},
      {"cache",
       {{"topic_capacity", c.topic_cache_capacity},
        {"dynamic_capacity", c.dynamic_cache_capacity}}},
      {"scorer",
       {{"embedding_dim", c.scorer.embedding_dim},
        {"score_hidden", c.scorer.score_hidden},
        {"gate_hidden", c.scorer.gate_hidden},
        {"freeze_embeddings", c.scorer.freeze_embeddings},
        {"learning_rate", c.learning_rate},
        {"epochs", c.epochs},
        {"batch_size", c.batch_size},
        {"gold_topic_ratio", c.gold_topic_ratio}}},
      {"eval",
       {{"test_fraction", c.test_fraction},
        {"bootstrap_resamples", c.bootstrap_resamples}}},
  };
}

PipelineConfig from_json(const json& j) {
  PipelineConfig c;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.work_dir = j.at("work_dir").get<std::string>();
  const auto& in = j.at("inputs");
  c.source_input = in.at("source").get<std::string>();
  c.target_input = in.at("target").get<std::string>();
  c.lexicon = in.at("lexicon").get<std::string>();
  c.source_lang = j.at("languages").at("source").get<std::string>();
  c.target_lang = j.at("languages").at("target").get<std::string>();
  const auto& corpus = j.at("corpus");
  c.biography_keywords = corpus.at("biography_keywords").get<std::vector<std::string>>();
  c.cleaning.min_len = corpus.at("min_len").get<std::size_t>();
  c.cleaning.max_len = corpus.at("max_len").get<std::size_t>();
  c.cleaning.max_ratio = corpus.at("max_ratio").get<double>();
  c.alignment.skip_penalty = corpus.at("skip_penalty").get<double>();
  c.bpe_merges = j.at("bpe").at("merges").get<std::size_t>();
  const auto& lda = j.at("lda");
  c.lda.topics = lda.at("topics").get<std::size_t>();
  c.lda.alpha = lda.at("alpha").get<double>();
  c.lda.beta = lda.at("beta").get<double>();
  c.lda.iterations = lda.at("iterations").get<std::size_t>();
  c.lda.burn_in = lda.at("burn_in").get<std::size_t>();
  c.lda.granularity = topics::parse_granularity(lda.at("granularity").get<std::string>());
  c.infer_iterations = lda.at("infer_iterations").get<std::size_t>();
  c.topic_cache_capacity = j.at("cache").at("topic_capacity").get<std::size_t>();
  c.dynamic_cache_capacity = j.at("cache").at("dynamic_capacity").get<std::size_t>();
  const auto& scorer = j.at("scorer");
  c.scorer.embedding_dim = scorer.at("embedding_dim").get<std::size_t>();
  c.scorer.score_hidden = scorer.at("score_hidden").get<std::vector<std::size_t>>();
  c.scorer.gate_hidden = scorer.at("gate_hidden").get<std::vector<std::size_t>>();
  c.scorer.freeze_embeddings = scorer.at("freeze_embeddings").get<bool>();
  c.learning_rate = scorer.at("learning_rate").get<double>();
  c.epochs = scorer.at("epochs").get<std::size_t>();
  c.batch_size = scorer.at("batch_size").get<std::size_t>();
  c.gold_topic_ratio = scorer.at("gold_topic_ratio").get<double>();
  c.test_fraction = j.at("eval").at("test_fraction").get<double>();
  c.bootstrap_resamples = j.at("eval").at("bootstrap_resamples").get<std::size_t>();
  return c;
}

bool compatible(const json& expected, const json& value) {
  if (expected.is_number_float()) return value.is_number();
  if (expected.is_number_unsigned()) return value.is_number_unsigned();
  if (expected.is_string()) return value.is_string();
  if (expected.is_boolean()) return value.is_boolean();
  if (expected.is_array()) {
    if (!value.is_array()) return false;
    if (expected.empty()) return true;
    return std::all_of(value.begin(), value.end(),
                       [&](const json& v) { return compatible(expected.front(), v); });
  }
  return false;
}

// Overlays patch onto target, rejecting keys or types the config does not have.
void overlay(json& target, const json& patch, const std::string& prefix) {
  if (!patch.is_object()) fail(ErrorKind::config, "config: '" + prefix + "' must be an object");
  for (const auto& [key, value] : patch.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (!target.contains(key)) fail(ErrorKind::config, "config: unknown key '" + name + "'");
    json& slot = target[key];
    if (slot.is_object()) {
      overlay(slot, value, name);
    } else if (!compatible(slot, value)) {
      fail(ErrorKind::config, "config: '" + name + "' has the wrong type");
    } else {
      slot = value;
    }
  }
}

void resolve_path(fs::path& p, const fs::path& base_dir) {
  if (!p.empty() && p.is_relative() && !base_dir.empty()) p = base_dir / p;
}

PipelineConfig apply_patch(const PipelineConfig& base, const json& patch,
                           const fs::path& base_dir) {
  json merged = to_json(base);
  overlay(merged, patch, "");
  PipelineConfig out;
  try {
    out = from_json(merged);
  } catch (const json::exception& e) {
    fail(ErrorKind::config, std::string("config: ") + e.what());
  }
  if (!base_dir.empty()) {
    // Only paths the patch set are relative to its own directory.
    const auto inputs = patch.value("inputs", json::object());
    if (inputs.contains("source")) resolve_path(out.source_input, base_dir);
    if (inputs.contains("target")) resolve_path(out.target_input, base_dir);
    if (inputs.contains("lexicon")) resolve_path(out.lexicon, base_dir);
    if (patch.contains("work_dir")) resolve_path(out.work_dir, base_dir);
  }
  return out;
}

}  // namespace

PipelineConfig parse_config(std::string_view json_text, PipelineConfig base,
                            const fs::path& base_dir) {
  json patch;
  try {
    patch = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
  }
  return apply_patch(base, patch, base_dir);
}

PipelineConfig load_config(const fs::path& path, PipelineConfig base) {
  return parse_config(read_file(path), std::move(base), path.parent_path());
}

void set_config_value(PipelineConfig& config, std::string_view key, std::string_view value) {
  if (key.empty()) fail(ErrorKind::config, "config: empty key");
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = std::string(value);
  }
  json patch = parsed;
  std::string dotted(key);
  for (std::size_t end = dotted.size(); end != std::string::npos;) {
    const std::size_t dot = dotted.rfind('.', end - 1);
    const std::string part =
        dotted.substr(dot == std::string::npos ? 0 : dot + 1,
                      end - (dot == std::string::npos ? 0 : dot + 1));
    patch = json{{part, patch}};
    end = dot;
  }
  config = apply_patch(config, patch, {});
}

std::string config_to_json(const PipelineConfig& config) {
  return to_json(config).dump(2) + "\n";
}

std::string config_hash(const PipelineConfig& config) {
  json j = to_json(config);
  j.erase("work_dir");
  j.erase("inputs");
  return hex64(fnv1a64(j.dump()));
}

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {
      "ingest",      "filter-bio", "align-sents",  "clean",        "learn-bpe",
      "apply-bpe",   "train-lda",  "infer-topics", "align-topics", "tag",
      "train-scorer", "cache-run", "eval",         "significance"};
  return names;
}

std::vector<std::string> test_documents(std::span<const std::string> doc_ids,
                                        double fraction, std::uint64_t seed) {
  const std::size_t n = doc_ids.size();
  if (n < 2) return {};
  auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  count = std::clamp<std::size_t>(count, 1, n - 1);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  order.resize(count);
  std::sort(order.begin(), order.end());
  std::vector<std::string> out;
  for (auto i : order) out.push_back(doc_ids[i]);
  return out;
}

// --- stage plumbing ------------------------------------------------------

namespace {

namespace layout {
constexpr std::string_view manifest = "manifest.json";
constexpr std::string_view source_corpus = "corpus/source.jsonl";
constexpr std::string_view target_corpus = "corpus/target.jsonl";
constexpr std::string_view source_bio = "corpus/source.bio.jsonl";
constexpr std::string_view target_bio = "corpus/target.bio.jsonl";
constexpr std::string_view raw_links = "corpus/links.raw.jsonl";
constexpr std::string_view links = "corpus/links.jsonl";
constexpr std::string_view merges = "bpe/merges.txt";
constexpr std::string_view source_bpe = "bpe/source.jsonl";
constexpr std::string_view target_bpe = "bpe/target.jsonl";
constexpr std::string_view source_model = "topics/source.model";
constexpr std::string_view target_model = "topics/target.model";
constexpr std::string_view source_units = "topics/source.units.jsonl";
constexpr std::string_view target_units = "topics/target.units.jsonl";
constexpr std::string_view alignment = "topics/alignment.txt";
constexpr std::string_view tagged_words = "tagged/source.words.jsonl";
constexpr std::string_view tagged_bpe = "tagged/source.jsonl";
constexpr std::string_view vocab = "scorer/vocab.txt";
constexpr std::string_view checkpoint = "scorer/scorer.ckpt";
constexpr std::string_view training_log = "scorer/training.jsonl";
constexpr std::string_view cache_run = "cache/run.jsonl";
constexpr std::string_view snapshots = "cache/snapshots.jsonl";
constexpr std::string_view bleu = "eval/bleu.txt";
constexpr std::string_view significance = "eval/significance.txt";
}  // namespace layout

struct Context {
  const PipelineConfig& config;
  std::string hash;
  ModuleSeeds seeds;
  std::string stage;
  const LogSink& sink;

  fs::path path(std::string_view rel) const { return config.work_dir / rel; }

  void log(const std::string& message) const {
    if (sink) sink("[" + stage + "] " + message);
  }
};

// Output files of one stage; all are committed together or none are.
class Outputs {
 public:
  explicit Outputs(const Context& ctx) : ctx_(ctx) {}

  std::ostream& open(std::string_view rel) {
    files_.push_back(std::make_unique<AtomicFile>(ctx_.path(rel)));
    names_.emplace_back(rel);
    return files_.back()->stream();
  }

  std::vector<std::string> commit() {
    for (auto& f : files_) f->commit();
    return names_;
  }

 private:
  const Context& ctx_;
  std::vector<std::unique_ptr<AtomicFile>> files_;
  std::vector<std::string> names_;
};

void json_header(std::ostream& out, std::string_view format, const std::string& hash) {
  out << json{{"format", format}, {"version", 1}, {"config", hash}}.dump() << '\n';
}

void text_header(std::ostream& out, std::string_view format, const std::string& hash) {
  out << "format: " << format << " 1\nconfig: " << hash << '\n';
}

template <typename Fn>
void for_each_json(const fs::path& path, std::string_view format, Fn fn) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const json record = json::parse(line);
      if (line_no == 1) {
        if (record.value("format", "") != format) {
          fail(ErrorKind::data, path.string() + " is not a " + std::string(format) + " file");
        }
        continue;
      }
      fn(record);
    } catch (const json::exception& e) {
      fail(ErrorKind::data, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

StructuredCorpus load_corpus(const Context& ctx, std::string_view rel) {
  auto in = open_input(ctx.path(rel));
  return read_corpus(in);
}

std::vector<BeadLink> load_links(const Context& ctx, std::string_view rel) {
  auto in = open_input(ctx.path(rel));
  return read_links(in);
}

topics::TopicModel load_model(const Context& ctx, std::string_view rel) {
  auto in = open_input(ctx.path(rel));
  return topics::read_model(in);
}

bpe::MergeTable load_merges(const Context& ctx) {
  auto in = open_input(ctx.path(layout::merges));
  return bpe::read_merge_table(in);
}

xalign::TopicAlignment load_alignment(const Context& ctx) {
  auto in = open_input(ctx.path(layout::alignment));
  return xalign::read_alignment(in);
}

std::map<std::string, std::size_t> load_unit_topics(const Context& ctx, std::string_view rel) {
  std::map<std::string, std::size_t> out;
  for_each_json(ctx.path(rel), "secmt-unit-topics", [&](const json& r) {
    out[r.at("unit").get<std::string>()] = r.at("topic").get<std::size_t>();
  });
  return out;
}

topics::UnitId unit_key(const std::string& doc_id, std::size_t section,
                        topics::Granularity granularity) {
  topics::UnitId id{doc_id, std::nullopt};
  if (granularity == topics::Granularity::section) id.section_index = section;
  return id;
}

void update_manifest(const Context& ctx, const std::vector<std::string>& outputs) {
  const fs::path path = ctx.path(layout::manifest);
  std::map<std::string, json> stages;
  if (fs::exists(path)) {
    try {
      const json old = json::parse(read_file(path));
      if (old.value("config", "") == ctx.hash) {
        for (const auto& s : old.at("stages")) stages[s.at("name").get<std::string>()] = s;
      }
    } catch (const json::exception&) {
      // A damaged manifest is rebuilt from scratch.
    }
  }
  json files = json::array();
  for (const auto& rel : outputs) {
    files.push_back({{"path", rel}, {"fnv1a64", hex64(fnv1a64(read_file(ctx.path(rel))))}});
  }
  stages[ctx.stage] = {{"name", ctx.stage}, {"config", ctx.hash}, {"outputs", files}};

  json manifest = {{"format", "secmt-manifest"},
                   {"version", 1},
                   {"config", ctx.hash},
                   {"seed", ctx.config.seed},
                   {"stages", json::array()}};
  for (const auto& name : stage_names()) {
    const auto it = stages.find(name);
    if (it != stages.end()) manifest["stages"].push_back(it->second);
  }
  AtomicFile out(path);
  out.stream() << manifest.dump(2) << '\n';
  out.commit();
}

// --- corpus stages -------------------------------------------------------

StructuredCorpus ingest_side(const Context& ctx, const fs::path& input, const std::string& lang,
                             std::string_view side) {
  if (input.empty()) fail(ErrorKind::config, "inputs." + std::string(side) + " is not set");
  if (!fs::exists(input)) {
    fail(ErrorKind::config, "input file does not exist: " + input.string());
  }
  auto in = open_input(input);
  const auto raw = read_raw_documents(in);
  const auto abbr = abbreviations(lang);
  std::set<std::string> seen;
  StructuredCorpus corpus;
  for (const auto& r : raw) {
    if (!seen.insert(r.doc_id).second) {
      fail(ErrorKind::data, "duplicate document id " + r.doc_id + " in " + input.string());
    }
    Document doc = parse_wikitext_lite(r.text, r.doc_id, r.lang.empty() ? lang : r.lang, abbr);
    doc.categories = r.categories;
    corpus.push_back(std::move(doc));
  }
  std::size_t sentences = 0;
  for (const auto& d : corpus) sentences += d.sentence_count();
  ctx.log(std::string(side) + ": " + std::to_string(corpus.size()) + " documents, " +
          std::to_string(sentences) + " sentences");
  return corpus;
}

std::vector<std::string> stage_ingest(const Context& ctx) {
  const auto source = ingest_side(ctx, ctx.config.source_input, ctx.config.source_lang, "source");
  const auto target = ingest_side(ctx, ctx.config.target_input, ctx.config.target_lang, "target");
  Outputs out(ctx);
  write_corpus(out.open(layout::source_corpus), source, ctx.hash);
  write_corpus(out.open(layout::target_corpus), target, ctx.hash);
  return out.commit();
}

std::vector<std::string> stage_filter_bio(const Context& ctx) {
  const auto source = load_corpus(ctx, layout::source_corpus);
  const auto target = load_corpus(ctx, layout::target_corpus);
  std::map<std::string, const Document*> by_id;
  for (const auto& d : target) by_id[d.doc_id] = &d;
  StructuredCorpus kept_source;
  StructuredCorpus kept_target;
  const auto& keywords = ctx.config.biography_keywords;
  for (const auto& doc : source) {
    const auto it = by_id.find(doc.doc_id);
    if (it == by_id.end()) continue;
    if (is_biography(doc, keywords) || is_biography(*it->second, keywords)) {
      kept_source.push_back(doc);
      kept_target.push_back(*it->second);
    }
  }
  ctx.log("kept " + std::to_string(kept_source.size()) + " of " +
          std::to_string(source.size()) + " documents");
  Outputs out(ctx);
  write_corpus(out.open(layout::source_bio), kept_source, ctx.hash);
  write_corpus(out.open(layout::target_bio), kept_target, ctx.hash);
  return out.commit();
}

std::unordered_map<std::string, std::string> load_lexicon(const fs::path& path) {
  if (!fs::exists(path)) fail(ErrorKind::config, "lexicon does not exist: " + path.string());
  auto in = open_input(path);
  std::unordered_map<std::string, std::string> lexicon;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      fail(ErrorKind::data, path.string() + ":" + std::to_string(line_no) +
                                ": expected source<TAB>target");
    }
    lexicon.emplace(text::to_lower(line.substr(0, tab)),
                    text::to_lower(text::trim(line.substr(tab + 1))));
  }
  return lexicon;
}

std::vector<std::string> lowered(std::span<const std::string> tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(text::to_lower(t));
  return out;
}

std::vector<std::string> stage_align_sents(const Context& ctx) {
  const auto source = load_corpus(ctx, layout::source_bio);
  const auto target = load_corpus(ctx, layout::target_bio);

  SentenceSimilarity similarity = bleu_similarity;
  std::unordered_map<std::string, std::string> lexicon;
  if (!ctx.config.lexicon.empty()) {
    lexicon = load_lexicon(ctx.config.lexicon);
    ctx.log("pivot lexicon with " + std::to_string(lexicon.size()) + " entries");
    similarity = [&lexicon](const Sentence& s, const Sentence& t) {
      auto pivot = lowered(s.tokens);
      for (auto& w : pivot) {
        const auto it = lexicon.find(w);
        if (it != lexicon.end()) w = it->second;
      }
      return eval::smoothed_sentence_bleu(pivot, lowered(t.tokens));
    };
  }

  std::map<std::string, const Document*> by_id;
  for (const auto& d : target) by_id[d.doc_id] = &d;
  std::vector<BeadLink> links;
  std::size_t skips = 0;
  for (const auto& doc : source) {
    const auto it = by_id.find(doc.doc_id);
    if (it == by_id.end()) continue;
    const auto src = flatten(doc);
    const auto tgt = flatten(*it->second);
    const auto beads = align_sentences(src, tgt, similarity, ctx.config.alignment);
    for (const auto& b : beads) skips += (b.source.size() == 0 || b.target.size() == 0);
    const auto doc_links = links_from_beads(doc, *it->second, beads);
    links.insert(links.end(), doc_links.begin(), doc_links.end());
  }
  ctx.log(std::to_string(links.size()) + " links, " + std::to_string(skips) + " skipped sentences");
  Outputs out(ctx);
  write_links(out.open(layout::raw_links), links, ctx.hash);
  return out.commit();
}

std::vector<std::string> stage_clean(const Context& ctx) {
  const auto source = load_corpus(ctx, layout::source_bio);
  const auto target = load_corpus(ctx, layout::target_bio);
  const auto links = load_links(ctx, layout::raw_links);
  const auto pairs = resolve_links(source, target, links);
  std::vector<BeadLink> kept;
  for (auto i : clean_parallel_indices(pairs, ctx.config.cleaning)) kept.push_back(links[i]);
  ctx.log("kept " + std::to_string(kept.size()) + " of " + std::to_string(links.size()) +
          " links");
  Outputs out(ctx);
  write_links(out.open(layout::links), kept, ctx.hash);
  return out.commit();
}

// --- subwords ------------------------------------------------------------

std::vector<std::string> stage_learn_bpe(const Context& ctx) {
  const auto source = load_corpus(ctx, layout::source_bio);
  const auto target = load_corpus(ctx, layout::target_bio);
  const auto links = load_links(ctx, layout::links);
  bpe::WordCounts counts;
  for (const auto& pair : resolve_links(source, target, links).pairs) {
    for (const auto& t : pair.source.tokens) ++counts[t];
    for (const auto& t : pair.target.tokens) ++counts[t];
  }
  const auto table = bpe::learn_bpe(counts, ctx.config.bpe_merges);
  ctx.log(std::to_string(table.merges.size()) + " merges from " +
          std::to_string(counts.size()) + " word types");
  Outputs out(ctx);
  bpe::write_merge_table(out.open(layout::merges), table, ctx.hash);
  return out.commit();
}

StructuredCorpus segment_corpus(StructuredCorpus corpus, const bpe::Segmenter& segmenter) {
  for (auto& doc : corpus) {
    for (auto& section : doc.sections) {
      for (auto& sentence : section.sentences) {
        sentence.tokens = segmenter.segment_sentence(sentence.tokens);
        sentence.text = text::join(sentence.tokens, " ");
      }
    }
  }
  return corpus;
}

std::vector<std::string> stage_apply_bpe(const Context& ctx) {
  const bpe::Segmenter segmenter(load_merges(ctx));
  Outputs out(ctx);
  write_corpus(out.open(layout::source_bpe),
               segment_corpus(load_corpus(ctx, layout::source_bio), segmenter), ctx.hash);
  write_corpus(out.open(layout::target_bpe),
               segment_corpus(load_corpus(ctx, layout::target_bio), segmenter), ctx.hash);
  return out.commit();
}

// --- topics --------------------------------------------------------------

topics::TopicModel train_side(const Context& ctx, std::string_view corpus_rel,
                              const std::string& lang, std::uint64_t seed,
                              std::string_view side) {
  const auto units = topics::prepare_units(load_corpus(ctx, corpus_rel),
                                           ctx.config.lda.granularity, stopwords(lang));
  if (units.empty()) fail(ErrorKind::data, std::string(side) + " corpus has no topic units");
  auto cfg = ctx.config.lda;
  cfg.seed = seed;
  const std::size_t step = std::max<std::size_t>(1, cfg.iterations / 5);
  auto model = topics::train_lda(units, cfg, [&](const topics::SweepView& view) {
    if ((view.sweep + 1) % step == 0) {
      ctx.log(std::string(side) + ": sweep " + std::to_string(view.sweep + 1) + "/" +
              std::to_string(cfg.iterations));
    }
  });
  ctx.log(std::string(side) + ": " + std::to_string(units.size()) + " units, vocabulary " +
          std::to_string(model.vocab_size()));
  return model;
}

std::vector<std::string> stage_train_lda(const Context& ctx) {
  const auto source = train_side(ctx, layout::source_bio, ctx.config.source_lang,
                                 ctx.seeds.lda_source, "source");
  const auto target = train_side(ctx, layout::target_bio, ctx.config.target_lang,
                                 ctx.seeds.lda_target, "target");
  Outputs out(ctx);
  topics::write_model(out.open(layout::source_model), source, ctx.hash);
  topics::write_model(out.open(layout::target_model), target, ctx.hash);
  return out.commit();
}

void write_unit_topics(std::ostream& out, const Context& ctx, std::string_view corpus_rel,
                       std::string_view model_rel, const std::string& lang) {
  const auto model = load_model(ctx, model_rel);
  json_header(out, "secmt-unit-topics", ctx.hash);
  std::size_t flagged = 0;
  for (const auto& unit : topics::prepare_units(load_corpus(ctx, corpus_rel),
                                                ctx.config.lda.granularity, stopwords(lang),
                                                true)) {
    const auto dist = topics::infer_topics(model, unit, ctx.config.infer_iterations,
                                           topics::unit_seed(ctx.seeds.inference, unit.id));
    flagged += dist.uninformative;
    out << json{{"unit", unit.id.key()},
                {"topic", topics::dominant_topic(dist.probs)},
                {"uninformative", dist.uninformative},
                {"probs", dist.probs}}
               .dump()
        << '\n';
  }
  if (flagged) ctx.log(std::to_string(flagged) + " units without known words");
}

std::vector<std::string> stage_infer_topics(const Context& ctx) {
  Outputs out(ctx);
  write_unit_topics(out.open(layout::source_units), ctx, layout::source_bio,
                    layout::source_model, ctx.config.source_lang);
  write_unit_topics(out.open(layout::target_units), ctx, layout::target_bio,
                    layout::target_model, ctx.config.target_lang);
  return out.commit();
}

std::map<std::string, topics::Unit> units_by_key(const StructuredCorpus& corpus,
                                                 topics::Granularity granularity,
                                                 const WordSet& stop) {
  std::map<std::string, topics::Unit> out;
  for (auto& unit : topics::prepare_units(corpus, granularity, stop, true)) {
    out.emplace(unit.id.key(), std::move(unit));
  }
  return out;
}

std::vector<std::string> stage_align_topics(const Context& ctx) {
  const auto granularity = ctx.config.lda.granularity;
  const auto source = units_by_key(load_corpus(ctx, layout::source_bio), granularity,
                                   stopwords(ctx.config.source_lang));
  const auto target = units_by_key(load_corpus(ctx, layout::target_bio), granularity,
                                   stopwords(ctx.config.target_lang));
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<xalign::UnitPair> pairs;
  for (const auto& link : load_links(ctx, layout::links)) {
    const auto s = unit_key(link.doc_id, link.source_section, granularity).key();
    const auto t = unit_key(link.doc_id, link.target_section, granularity).key();
    if (!seen.emplace(s, t).second) continue;
    const auto si = source.find(s);
    const auto ti = target.find(t);
    if (si == source.end() || ti == target.end()) {
      fail(ErrorKind::data, "link refers to unit " + s + " / " + t + " missing from the corpus");
    }
    pairs.emplace_back(si->second, ti->second);
  }
  const auto alignment =
      xalign::build_alignment(pairs, load_model(ctx, layout::source_model),
                              load_model(ctx, layout::target_model),
                              {ctx.config.infer_iterations, ctx.seeds.inference});
  ctx.log(std::to_string(pairs.size()) + " unit pairs, fallback topic " +
          std::to_string(alignment.fallback));
  Outputs out(ctx);
  xalign::write_alignment(out.open(layout::alignment), alignment, ctx.hash);
  return out.commit();
}

std::vector<std::string> stage_tag(const Context& ctx) {
  sideconstraints::TaggingOptions options;
  options.granularity = ctx.config.lda.granularity;
  options.infer_iterations = ctx.config.infer_iterations;
  options.seed = ctx.seeds.inference;
  options.stopwords = stopwords(ctx.config.source_lang);
  const auto result = sideconstraints::tag_corpus(load_corpus(ctx, layout::source_bio),
                                                  load_model(ctx, layout::source_model),
                                                  options);
  for (const auto& w : result.warnings) ctx.log("warning: " + w);

  auto segmented = load_corpus(ctx, layout::source_bpe);
  std::size_t i = 0;
  for (auto& doc : segmented) {
    for (auto& section : doc.sections) {
      for (auto& sentence : section.sentences) {
        if (i >= result.sentences.size()) {
          fail(ErrorKind::data, "segmented corpus does not match the tagged corpus");
        }
        const std::size_t topic = result.sentences[i++].topic;
        sentence.text = sideconstraints::tag_sentence(sentence.text, topic).text;
        sentence.tokens.insert(sentence.tokens.begin(), sideconstraints::topic_tag(topic));
      }
    }
  }
  if (i != result.sentences.size()) {
    fail(ErrorKind::data, "segmented corpus does not match the tagged corpus");
  }
  ctx.log("tagged " + std::to_string(i) + " sentences");
  Outputs out(ctx);
  write_corpus(out.open(layout::tagged_words), result.corpus, ctx.hash);
  write_corpus(out.open(layout::tagged_bpe), segmented, ctx.hash);
  return out.commit();
}

// --- cache scorer --------------------------------------------------------

// Everything the scorer stages share, rebuilt deterministically from artifacts.
struct ScorerWorld {
  bpe::MergeTable merges;
  std::unique_ptr<bpe::Segmenter> segmenter;
  topics::TopicModel target_model;
  xalign::TopicAlignment alignment;
  std::map<std::string, std::size_t> source_topic;
  std::map<std::string, std::size_t> target_topic;
  ParallelCorpus pairs;
  std::vector<std::string> docs;  // documents with links, in link order
  std::set<std::string> test_docs;
};

ScorerWorld load_world(const Context& ctx) {
  ScorerWorld w;
  w.merges = load_merges(ctx);
  w.segmenter = std::make_unique<bpe::Segmenter>(w.merges);
  w.target_model = load_model(ctx, layout::target_model);
  w.alignment = load_alignment(ctx);
  w.source_topic = load_unit_topics(ctx, layout::source_units);
  w.target_topic = load_unit_topics(ctx, layout::target_units);
  const auto links = load_links(ctx, layout::links);
  w.pairs = resolve_links(load_corpus(ctx, layout::source_bpe),
                          load_corpus(ctx, layout::target_bpe), links);
  for (const auto& l : links) {
    if (w.docs.empty() || w.docs.back() != l.doc_id) w.docs.push_back(l.doc_id);
  }
  const auto test = test_documents(w.docs, ctx.config.test_fraction, ctx.seeds.shuffle);
  w.test_docs.insert(test.begin(), test.end());
  return w;
}

cache::CacheDeps cache_deps(const Context& ctx, const ScorerWorld& w) {
  return {&w.target_model, w.segmenter.get(), ctx.config.topic_cache_capacity,
          ctx.config.dynamic_cache_capacity};
}

topics::Vocabulary build_vocab(const Context& ctx, const ScorerWorld& w) {
  topics::Vocabulary vocab;
  vocab.add("<s>");
  for (const auto& pair : w.pairs.pairs) {
    for (const auto& t : pair.target.tokens) vocab.add(t);
  }
  for (std::size_t k = 0; k < w.target_model.topics(); ++k) {
    for (const auto& e : cache::load_topic_cache(w.target_model, k,
                                                 ctx.config.topic_cache_capacity,
                                                 *w.segmenter)
                             .entries) {
      vocab.add(e);
    }
  }
  return vocab;
}

std::vector<std::size_t> to_ids(const topics::Vocabulary& vocab,
                                 std::span<const std::string> tokens) {
  std::vector<std::size_t> ids;
  for (const auto& t : tokens) {
    const auto id = vocab.find(t);
    if (!id) fail(ErrorKind::data, "token '" + t + "' is not in the scorer vocabulary");
    ids.push_back(*id);
  }
  return ids;
}

neural::MockBaseModel fit_base_model(const Context& ctx, const ScorerWorld& w,
                                     const topics::Vocabulary& vocab) {
  neural::MockBaseModel base(vocab.size(), ctx.config.scorer.embedding_dim,
                             ctx.seeds.base_model);
  std::vector<std::vector<std::size_t>> sentences;
  for (const auto& pair : w.pairs.pairs) {
    if (!w.test_docs.count(pair.target.doc_id)) {
      sentences.push_back(to_ids(vocab, pair.target.tokens));
    }
  }
  base.fit(sentences);
  return base;
}

struct Step {
  neural::DecoderContext context;
  std::vector<std::size_t> cache_ids;
  neural::Vector p_nmt;
  std::size_t gold = 0;
};

// Replays the pairs of one split through the cache session, calling fn once
// per sentence with its unit, topic, cache state and teacher-forced steps.
template <typename Fn>
void replay(const Context& ctx, const ScorerWorld& w, const topics::Vocabulary& vocab,
            const neural::MockBaseModel& base, bool test_split, Fn fn) {
  const auto granularity = ctx.config.lda.granularity;
  std::vector<std::string> units;
  std::set<std::string> unit_seen;
  for (const auto& pair : w.pairs.pairs) {
    if (w.test_docs.count(pair.target.doc_id) != static_cast<std::size_t>(test_split)) continue;
    const auto key = topics::unit_of(pair.target, granularity).key();
    if (unit_seen.insert(key).second) units.push_back(key);
  }
  std::map<std::string, neural::TopicSource> source_of;
  if (!test_split) {
    const auto schedule =
        neural::topic_schedule(units.size(), ctx.config.gold_topic_ratio, ctx.seeds.schedule);
    for (std::size_t i = 0; i < units.size(); ++i) source_of[units[i]] = schedule[i];
  }

  cache::CacheSession session(cache_deps(ctx, w),
                              cache::StopwordFilter::for_language(ctx.config.target_lang));
  for (const auto& pair : w.pairs.pairs) {
    if (w.test_docs.count(pair.target.doc_id) != static_cast<std::size_t>(test_split)) continue;
    const auto target_unit = topics::unit_of(pair.target, granularity).key();
    const auto source_unit = topics::unit_of(pair.source, granularity).key();
    std::size_t topic = w.alignment.fallback;
    const auto gold = source_of.find(target_unit);
    if (gold != source_of.end() && gold->second == neural::TopicSource::gold &&
        w.target_topic.count(target_unit)) {
      topic = w.target_topic.at(target_unit);
    } else if (const auto it = w.source_topic.find(source_unit); it != w.source_topic.end()) {
      topic = xalign::project_topic(w.alignment, it->second);
    }

    session.begin_sentence(target_unit, topic);
    const auto cache_ids = to_ids(vocab, session.words());
    const auto ids = to_ids(vocab, pair.target.tokens);
    std::vector<Step> steps;
    for (std::size_t t = 0; t < ids.size(); ++t) {
      auto out = base(std::span<const std::size_t>(ids).first(t), pair.source.tokens);
      steps.push_back({std::move(out.context), cache_ids, std::move(out.p_nmt), ids[t]});
    }
    fn(pair, target_unit, topic, session.state(), steps);
    session.complete_sentence(pair.target.tokens);
  }
}

neural::ScorerConfig scorer_config(const Context& ctx) {
  auto cfg = ctx.config.scorer;
  cfg.seed = ctx.seeds.scorer;
  return cfg;
}

std::vector<std::string> stage_train_scorer(const Context& ctx) {
  const auto w = load_world(ctx);
  const auto vocab = build_vocab(ctx, w);
  const auto base = fit_base_model(ctx, w, vocab);

  std::vector<neural::TrainingExample> examples;
  replay(ctx, w, vocab, base, false,
         [&](const SentencePair&, const std::string&, std::size_t, const cache::CacheState&,
             std::vector<Step>& steps) {
           for (auto& s : steps) {
             examples.push_back({std::move(s.context), std::move(s.cache_ids),
                                 std::move(s.p_nmt), s.gold});
           }
         });
  if (examples.empty()) fail(ErrorKind::data, "no training examples for the cache scorer");
  ctx.log(std::to_string(examples.size()) + " training positions, vocabulary " +
          std::to_string(vocab.size()) + ", " + std::to_string(w.test_docs.size()) +
          " held-out documents");

  auto params = neural::init_params(scorer_config(ctx), base.embeddings());
  Outputs out(ctx);
  auto& log_out = out.open(layout::training_log);
  json_header(log_out, "secmt-scorer-training", ctx.hash);
  const std::size_t batch = ctx.config.batch_size;
  for (std::size_t epoch = 0; epoch < ctx.config.epochs; ++epoch) {
    Rng rng(derive_seed(ctx.seeds.shuffle, epoch + 1));
    for (std::size_t i = examples.size(); i > 1; --i) {
      std::swap(examples[i - 1], examples[rng.index(i)]);
    }
    double total = 0.0;
    for (std::size_t b = 0; b < examples.size(); b += batch) {
      const std::size_t n = std::min(batch, examples.size() - b);
      total += neural::train_step(
                   params, std::span<const neural::TrainingExample>(examples).subspan(b, n),
                   ctx.config.learning_rate) *
               static_cast<double>(n);
    }
    const double mean = total / static_cast<double>(examples.size());
    log_out << json{{"epoch", epoch + 1}, {"loss", mean}}.dump() << '\n';
    ctx.log("epoch " + std::to_string(epoch + 1) + " mean loss " + format_double(mean));
  }

  auto& vocab_out = out.open(layout::vocab);
  text_header(vocab_out, "secmt-vocab", ctx.hash);
  for (const auto& word : vocab.words()) vocab_out << word << '\n';
  neural::write_checkpoint(out.open(layout::checkpoint), params, ctx.hash);
  return out.commit();
}

topics::Vocabulary load_vocab(const Context& ctx) {
  auto in = open_input(ctx.path(layout::vocab));
  std::string line;
  if (!std::getline(in, line) || line != "format: secmt-vocab 1" || !std::getline(in, line)) {
    fail(ErrorKind::data, "bad scorer vocabulary file");
  }
  topics::Vocabulary vocab;
  while (std::getline(in, line)) vocab.add(line);
  return vocab;
}

std::size_t argmax(const neural::Vector& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return static_cast<std::size_t>(best);
}

std::string detokenize(std::span<const std::string> tokens, std::string_view marker) {
  return text::join(bpe::undo_bpe_sentence(tokens, marker), " ");
}

std::vector<std::string> stage_cache_run(const Context& ctx) {
  const auto w = load_world(ctx);
  const auto vocab = load_vocab(ctx);
  auto in = open_input(ctx.path(layout::checkpoint));
  const auto params = neural::read_checkpoint(in);
  if (static_cast<std::size_t>(params.embeddings->rows()) != vocab.size() ||
      params.config.embedding_dim != ctx.config.scorer.embedding_dim) {
    fail(ErrorKind::data, "scorer checkpoint does not match the vocabulary or config");
  }
  const auto base = fit_base_model(ctx, w, vocab);
  const auto& marker = w.merges.marker;

  Outputs out(ctx);
  auto& run = out.open(layout::cache_run);
  auto& snaps = out.open(layout::snapshots);
  json_header(run, "secmt-cache-run", ctx.hash);
  json_header(snaps, "secmt-cache-snapshots", ctx.hash);
  double nll_base = 0.0;
  double nll_cache = 0.0;
  std::size_t positions = 0;
  std::size_t sentences = 0;
  replay(ctx, w, vocab, base, true,
         [&](const SentencePair& pair, const std::string& unit, std::size_t topic,
             const cache::CacheState& state, std::vector<Step>& steps) {
           std::vector<std::string> base_choice;
           std::vector<std::string> cache_choice;
           std::vector<double> gold_base;
           std::vector<double> gold_cache;
           std::vector<double> gates;
           double sent_base = 0.0;
           double sent_cache = 0.0;
           for (const auto& s : steps) {
             const auto p = neural::predict(params, s.context, s.cache_ids, s.p_nmt);
             const auto g = static_cast<Eigen::Index>(s.gold);
             base_choice.push_back(vocab.word(argmax(s.p_nmt)));
             cache_choice.push_back(vocab.word(argmax(p)));
             gold_base.push_back(s.p_nmt(g));
             gold_cache.push_back(p(g));
             gates.push_back(s.cache_ids.empty() ? 1.0 : neural::gate(params, s.context));
             sent_base -= std::log(s.p_nmt(g));
             sent_cache -= std::log(p(g));
           }
           nll_base += sent_base;
           nll_cache += sent_cache;
           positions += steps.size();
           ++sentences;
           run << json{{"doc_id", pair.target.doc_id},
                       {"unit", unit},
                       {"topic", topic},
                       {"cache_size", steps.empty() ? 0 : steps.front().cache_ids.size()},
                       {"reference", detokenize(pair.target.tokens, marker)},
                       {"base", detokenize(base_choice, marker)},
                       {"cache", detokenize(cache_choice, marker)},
                       {"gold_p_base", gold_base},
                       {"gold_p_cache", gold_cache},
                       {"gate", gates},
                       {"nll_base", sent_base},
                       {"nll_cache", sent_cache}}
                      .dump()
               << '\n';
           cache::write_snapshot(snaps, state);
         });
  if (positions > 0) {
    ctx.log(std::to_string(sentences) + " sentences; per-token NLL base " +
            format_double(nll_base / static_cast<double>(positions)) + ", cache " +
            format_double(nll_cache / static_cast<double>(positions)));
  }
  return out.commit();
}

// --- evaluation ----------------------------------------------------------

struct RunOutputs {
  std::vector<std::string> references;
  std::vector<std::string> base;
  std::vector<std::string> cache;
  double nll_base = 0.0;
  double nll_cache = 0.0;
  std::size_t positions = 0;
};

RunOutputs load_run(const Context& ctx) {
  RunOutputs r;
  for_each_json(ctx.path(layout::cache_run), "secmt-cache-run", [&](const json& j) {
    r.references.push_back(j.at("reference").get<std::string>());
    r.base.push_back(j.at("base").get<std::string>());
    r.cache.push_back(j.at("cache").get<std::string>());
    r.nll_base += j.at("nll_base").get<double>();
    r.nll_cache += j.at("nll_cache").get<double>();
    r.positions += j.at("gold_p_base").size();
  });
  if (r.references.empty()) fail(ErrorKind::data, "cache run has no held-out sentences");
  return r;
}

std::vector<std::string> stage_eval(const Context& ctx) {
  const auto run = load_run(ctx);
  const auto base = eval::corpus_bleu(run.base, run.references);
  const auto cache = eval::corpus_bleu(run.cache, run.references);
  ctx.log("BLEU base " + format_double(base.score) + ", cache " + format_double(cache.score));
  Outputs out(ctx);
  auto& report = out.open(layout::bleu);
  text_header(report, "secmt-bleu-report", ctx.hash);
  report << "sentences: " << run.references.size() << '\n'
         << "system: base\n"
         << eval::format_report(base) << "system: cache\n"
         << eval::format_report(cache) << "token_nll_base: "
         << format_double(run.nll_base / static_cast<double>(run.positions)) << '\n'
         << "token_nll_cache: "
         << format_double(run.nll_cache / static_cast<double>(run.positions)) << '\n';
  return out.commit();
}

std::vector<std::string> stage_significance(const Context& ctx) {
  const auto run = load_run(ctx);
  const auto result = eval::bootstrap_significance(run.cache, run.base, run.references,
                                                   ctx.config.bootstrap_resamples,
                                                   ctx.seeds.bootstrap);
  ctx.log("p = " + format_double(result.p_value) + (result.reversed ? " (reversed)" : ""));
  Outputs out(ctx);
  auto& report = out.open(layout::significance);
  text_header(report, "secmt-significance-report", ctx.hash);
  report << "system_a: cache\nsystem_b: base\n" << eval::format_report(result);
  return out.commit();
}

using StageFn = std::vector<std::string> (*)(const Context&);

StageFn stage_function(std::string_view name) {
  static const std::map<std::string, StageFn, std::less<>> table = {
      {"ingest", stage_ingest},
      {"filter-bio", stage_filter_bio},
      {"align-sents", stage_align_sents},
      {"clean", stage_clean},
      {"learn-bpe", stage_learn_bpe},
      {"apply-bpe", stage_apply_bpe},
      {"train-lda", stage_train_lda},
      {"infer-topics", stage_infer_topics},
      {"align-topics", stage_align_topics},
      {"tag", stage_tag},
      {"train-scorer", stage_train_scorer},
      {"cache-run", stage_cache_run},
      {"eval", stage_eval},
      {"significance", stage_significance},
  };
  const auto it = table.find(name);
  if (it == table.end()) fail(ErrorKind::config, "unknown stage '" + std::string(name) + "'");
  return it->second;
}

}  // namespace

void run_stage(std::string_view stage, const PipelineConfig& config, const LogSink& log) {
  const StageFn fn = stage_function(stage);
  config.validate();
  const Context ctx{config, config_hash(config), module_seeds(config.seed),
                    std::string(stage), log};
  ctx.log("start");
  const auto outputs = fn(ctx);
  update_manifest(ctx, outputs);
  ctx.log("done");
}

void run_all(const PipelineConfig& config, const LogSink& log) {
  config.validate();
  for (const auto& stage : stage_names()) run_stage(stage, config, log);
}

}  // namespace secmt::pipeline
