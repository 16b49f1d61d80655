#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace secmt::eval {

// The WMT "13a" tokenizer as used by SacreBLEU, reproduced rule for rule:
//   1. drop "<skipped>", join "-\n" hyphenation, newlines become spaces;
//   2. unescape &quot; &amp; &lt; &gt;;
//   3. pad the symbols {|}~ [\]^_` !"#$%& ()*+ :;<=>?@ and /;
//   4. pad '.' and ',' unless preceded by a digit, then unless followed
//      by a digit; pad '-' after a digit;
//   5. split on whitespace.
std::vector<std::string> tokenize_13a(std::string_view line);

inline constexpr std::size_t kMaxOrder = 4;

// Clipped n-gram sufficient statistics for one or more segments.
struct NgramStats {
  std::array<std::uint64_t, kMaxOrder> matches{};
  std::array<std::uint64_t, kMaxOrder> totals{};
  std::uint64_t hyp_len = 0;
  std::uint64_t ref_len = 0;

  NgramStats& operator+=(const NgramStats& other);
};

NgramStats segment_stats(std::span<const std::string> hyp,
                         std::span<const std::string> ref);

struct BleuReport {
  double score = 0.0;                             // [0, 100]
  std::array<double, kMaxOrder> precisions{};     // fractions in [0, 1]
  double brevity_penalty = 1.0;
  std::uint64_t hyp_len = 0;
  std::uint64_t ref_len = 0;
};

// Unsmoothed BLEU; zero when any n-gram precision is zero.
BleuReport bleu_from_stats(const NgramStats& stats);

// Single-reference corpus BLEU over 13a-tokenized text.
BleuReport corpus_bleu(std::span<const std::string> hyps,
                       std::span<const std::string> refs);

// Sentence BLEU in [0, 1] with add-one smoothing on every precision.
// Used as the sentence-alignment similarity, not for reporting.
double smoothed_sentence_bleu(std::span<const std::string> hyp,
                              std::span<const std::string> ref);

struct SignificanceResult {
  double p_value = 1.0;
  // True when system B scored higher on the full set and the test was run
  // for B over A.
  bool reversed = false;
  double bleu_a = 0.0;
  double bleu_b = 0.0;
  std::size_t resamples = 0;
};

// Paired bootstrap resampling. p is the fraction of resamples in which the
// better system's advantage is <= 0.
SignificanceResult bootstrap_significance(std::span<const std::string> hyps_a,
                                          std::span<const std::string> hyps_b,
                                          std::span<const std::string> refs,
                                          std::size_t n_resamples,
                                          std::uint64_t seed);

// Same test over explicit resample index sets and precomputed segment stats.
SignificanceResult paired_bootstrap(
    std::span<const NgramStats> stats_a, std::span<const NgramStats> stats_b,
    std::span<const std::vector<std::size_t>> resamples);

// Index sets drawn with replacement; stream i is seeded from (seed, i).
std::vector<std::vector<std::size_t>> draw_resamples(std::size_t n_segments,
                                                     std::size_t n_resamples,
                                                     std::uint64_t seed);

// "key: value" lines.
std::string format_report(const BleuReport& report);
std::string format_report(const SignificanceResult& result);

}  // namespace secmt::eval
