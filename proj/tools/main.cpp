// secmt: command line driver for the section-aware translation pipeline.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "secmt/artifact.hpp"
#include "secmt/corpus.hpp"
#include "secmt/error.hpp"
#include "secmt/eval.hpp"
#include "secmt/pipeline.hpp"
#include "secmt/synth.hpp"
#include "secmt/topics.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::string work_dir;
  std::string source;
  std::string target;
  std::string lexicon;
  std::string granularity;
  std::vector<std::string> settings;
  bool quiet = false;
};

void print_error(secmt::ErrorKind kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", {{"kind", secmt::to_string(kind)},
                                         {"message", message}}}}
                   .dump()
            << '\n';
}

// defaults < config file < SECMT_SEED < --set < dedicated flags
secmt::pipeline::PipelineConfig resolve_config(const GlobalOptions& g) {
  secmt::pipeline::PipelineConfig config;
  if (!g.config_file.empty()) {
    if (!fs::exists(g.config_file)) {
      secmt::fail(secmt::ErrorKind::config, "config file does not exist: " + g.config_file);
    }
    config = secmt::pipeline::load_config(g.config_file);
  }
  if (const char* env = std::getenv("SECMT_SEED"); env && *env) {
    try {
      config.seed = secmt::parse_uint(env);
    } catch (const secmt::Error&) {
      secmt::fail(secmt::ErrorKind::config, "SECMT_SEED is not an unsigned integer");
    }
  }
  for (const auto& s : g.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      secmt::fail(secmt::ErrorKind::config, "--set expects KEY=VALUE, got '" + s + "'");
    }
    secmt::pipeline::set_config_value(config, s.substr(0, eq), s.substr(eq + 1));
  }
  if (g.seed) config.seed = *g.seed;
  if (!g.work_dir.empty()) config.work_dir = g.work_dir;
  if (!g.source.empty()) config.source_input = g.source;
  if (!g.target.empty()) config.target_input = g.target;
  if (!g.lexicon.empty()) config.lexicon = g.lexicon;
  if (!g.granularity.empty()) {
    config.lda.granularity = secmt::topics::parse_granularity(g.granularity);
  }
  config.validate();
  return config;
}

std::vector<std::string> read_lines(const std::string& path) {
  auto in = secmt::open_input(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_synth(const fs::path& out_dir, const secmt::synth::SynthOptions& options) {
  const auto corpus = secmt::synth::generate(options);
  {
    secmt::AtomicFile f(out_dir / "source.jsonl");
    secmt::write_raw_documents(f.stream(), corpus.source);
    f.commit();
  }
  {
    secmt::AtomicFile f(out_dir / "target.jsonl");
    secmt::write_raw_documents(f.stream(), corpus.target);
    f.commit();
  }
  {
    secmt::AtomicFile f(out_dir / "lexicon.tsv");
    secmt::synth::write_lexicon(f.stream(), corpus.lexicon);
    f.commit();
  }
  // Desk-scale settings; the built-in defaults are the full-size ones.
  secmt::pipeline::PipelineConfig config;
  config.seed = options.seed;
  config.work_dir = "work";
  config.source_input = "source.jsonl";
  config.target_input = "target.jsonl";
  config.lexicon = "lexicon.tsv";
  config.bpe_merges = 400;
  config.lda.topics = 8;
  config.lda.iterations = 200;
  config.infer_iterations = 50;
  config.topic_cache_capacity = 30;
  config.dynamic_cache_capacity = 30;
  config.scorer.embedding_dim = 16;
  config.scorer.score_hidden = {32, 16};
  config.scorer.gate_hidden = {16, 8};
  config.learning_rate = 0.1;
  config.epochs = 3;
  config.bootstrap_resamples = 200;
  secmt::AtomicFile f(out_dir / "config.json");
  f.stream() << secmt::pipeline::config_to_json(config);
  f.commit();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Section-aware topic pipeline for document-level translation", "secmt"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("-c,--config", g.config_file, "JSON config file");
  app.add_option("--seed", g.seed, "Global seed (overrides SECMT_SEED and the config)");
  app.add_option("-w,--work-dir", g.work_dir, "Directory for artifacts");
  app.add_option("--source", g.source, "Source raw documents (JSON lines)");
  app.add_option("--target", g.target, "Target raw documents (JSON lines)");
  app.add_option("--lexicon", g.lexicon, "Source-to-target word lexicon for alignment");
  app.add_option("--granularity", g.granularity, "Topic unit: section or document");
  app.add_option("--set", g.settings, "Override a config key, e.g. --set lda.topics=20");
  app.add_flag("-q,--quiet", g.quiet, "No progress messages on stderr");

  std::vector<std::pair<CLI::App*, std::string>> stages;
  for (const auto& name : secmt::pipeline::stage_names()) {
    if (name == "eval" || name == "significance") continue;
    stages.emplace_back(app.add_subcommand(name, "Run the " + name + " stage"), name);
  }
  auto* run = app.add_subcommand("run", "Run every stage in order");
  auto* show = app.add_subcommand("config", "Print the effective config as JSON");

  std::string hyps;
  std::string hyps_b;
  std::string refs;
  auto* eval_cmd = app.add_subcommand(
      "eval", "Score the cache run, or --hyps against --refs (one sentence per line)");
  eval_cmd->add_option("--hyps", hyps, "Hypothesis file");
  eval_cmd->add_option("--refs", refs, "Reference file");

  std::size_t resamples = 1000;
  std::uint64_t sig_seed = 1;
  auto* sig_cmd = app.add_subcommand(
      "significance", "Paired bootstrap on the cache run, or on --hyps/--hyps-b vs --refs");
  sig_cmd->add_option("--hyps", hyps, "System A hypotheses");
  sig_cmd->add_option("--hyps-b", hyps_b, "System B hypotheses");
  sig_cmd->add_option("--refs", refs, "Reference file");
  sig_cmd->add_option("--resamples", resamples, "Bootstrap resamples")->capture_default_str();
  sig_cmd->add_option("--bootstrap-seed", sig_seed, "Seed for ad hoc mode")->capture_default_str();

  std::string synth_out;
  secmt::synth::SynthOptions synth_options;
  auto* synth = app.add_subcommand("synth", "Write a synthetic bilingual biography corpus");
  synth->add_option("-o,--out", synth_out, "Output directory")->required();
  synth->add_option("--documents", synth_options.biographies, "Number of biographies")
      ->capture_default_str();
  synth->add_option("--other", synth_options.other_documents, "Number of non-biographies")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error(secmt::ErrorKind::config, e.what());
    return secmt::exit_code(secmt::ErrorKind::config);
  }

  const secmt::pipeline::LogSink log = [&](std::string_view message) {
    if (!g.quiet) std::cerr << "secmt: " << message << '\n';
  };

  try {
    if (synth->parsed()) {
      synth_options.seed = g.seed.value_or(1);
      write_synth(synth_out, synth_options);
      log("wrote synthetic corpus to " + synth_out);
      return 0;
    }
    if (eval_cmd->parsed() && (!hyps.empty() || !refs.empty())) {
      if (hyps.empty() || refs.empty()) {
        secmt::fail(secmt::ErrorKind::config, "eval needs both --hyps and --refs");
      }
      std::cout << secmt::eval::format_report(
          secmt::eval::corpus_bleu(read_lines(hyps), read_lines(refs)));
      return 0;
    }
    if (sig_cmd->parsed() && (!hyps.empty() || !hyps_b.empty() || !refs.empty())) {
      if (hyps.empty() || hyps_b.empty() || refs.empty()) {
        secmt::fail(secmt::ErrorKind::config,
                    "significance needs --hyps, --hyps-b and --refs");
      }
      std::cout << secmt::eval::format_report(secmt::eval::bootstrap_significance(
          read_lines(hyps), read_lines(hyps_b), read_lines(refs), resamples, sig_seed));
      return 0;
    }

    const auto config = resolve_config(g);
    if (show->parsed()) {
      std::cout << secmt::pipeline::config_to_json(config);
    } else if (run->parsed()) {
      secmt::pipeline::run_all(config, log);
    } else if (eval_cmd->parsed()) {
      secmt::pipeline::run_stage("eval", config, log);
    } else if (sig_cmd->parsed()) {
      secmt::pipeline::run_stage("significance", config, log);
    } else {
      for (const auto& [cmd, name] : stages) {
        if (cmd->parsed()) secmt::pipeline::run_stage(name, config, log);
      }
    }
  } catch (const secmt::Error& e) {
    print_error(e.kind(), e.what());
    return secmt::exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    print_error(secmt::ErrorKind::data, e.what());
    return secmt::exit_code(secmt::ErrorKind::data);
  } catch (const std::exception& e) {
    print_error(secmt::ErrorKind::invariant, e.what());
    return secmt::exit_code(secmt::ErrorKind::invariant);
  }
  return 0;
}
