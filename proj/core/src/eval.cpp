#include "secmt/eval.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "secmt/artifact.hpp"
#include "secmt/error.hpp"
#include "secmt/random.hpp"
#include "secmt/text.hpp"

namespace secmt::eval {

namespace {

bool is_padded_symbol(char32_t c) {
  // [{-~] [[-`] [ -&] [(-+] [:-@] and '/'
  return (c >= U'{' && c <= U'~') || (c >= U'[' && c <= U'`') ||
         (c >= U' ' && c <= U'&') || (c >= U'(' && c <= U'+') ||
         (c >= U':' && c <= U'@') || c == U'/';
}

bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }
bool is_period_or_comma(char32_t c) { return c == U'.' || c == U','; }

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

// Applies a two-character pattern the way a regex substitution does: scan
// left to right, and after a match resume past both characters.
template <typename Match, typename Emit>
std::u32string rewrite_pairs(const std::u32string& in, Match match, Emit emit) {
  std::u32string out;
  out.reserve(in.size() + in.size() / 2);
  std::size_t i = 0;
  while (i < in.size()) {
    if (i + 1 < in.size() && match(in[i], in[i + 1])) {
      emit(out, in[i], in[i + 1]);
      i += 2;
    } else {
      out.push_back(in[i]);
      ++i;
    }
  }
  return out;
}

double log_or_neg_inf(double x) {
  return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
}

}  // namespace

std::vector<std::string> tokenize_13a(std::string_view line_in) {
  std::string line(line_in);
  replace_all(line, "<skipped>", "");
  replace_all(line, "-\n", "");
  replace_all(line, "\n", " ");
  if (line.find('&') != std::string::npos) {
    replace_all(line, "&quot;", "\"");
    replace_all(line, "&amp;", "&");
    replace_all(line, "&lt;", "<");
    replace_all(line, "&gt;", ">");
  }

  const std::u32string decoded = text::decode_utf8(" " + line + " ");
  std::u32string padded;
  padded.reserve(decoded.size() * 2);
  for (char32_t c : decoded) {
    if (is_padded_symbol(c)) {
      padded.push_back(U' ');
      padded.push_back(c);
      padded.push_back(U' ');
    } else {
      padded.push_back(c);
    }
  }

  auto s = rewrite_pairs(
      padded,
      [](char32_t a, char32_t b) { return !is_digit(a) && is_period_or_comma(b); },
      [](std::u32string& o, char32_t a, char32_t b) {
        o.push_back(a);
        o.push_back(U' ');
        o.push_back(b);
        o.push_back(U' ');
      });
  s = rewrite_pairs(
      s,
      [](char32_t a, char32_t b) { return is_period_or_comma(a) && !is_digit(b); },
      [](std::u32string& o, char32_t a, char32_t b) {
        o.push_back(U' ');
        o.push_back(a);
        o.push_back(U' ');
        o.push_back(b);
      });
  s = rewrite_pairs(
      s, [](char32_t a, char32_t b) { return is_digit(a) && b == U'-'; },
      [](std::u32string& o, char32_t a, char32_t b) {
        o.push_back(a);
        o.push_back(U' ');
        o.push_back(b);
        o.push_back(U' ');
      });

  return text::split_whitespace(text::encode_utf8(s));
}

NgramStats& NgramStats::operator+=(const NgramStats& other) {
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  hyp_len += other.hyp_len;
  ref_len += other.ref_len;
  return *this;
}

NgramStats segment_stats(std::span<const std::string> hyp,
                         std::span<const std::string> ref) {
  NgramStats stats;
  stats.hyp_len = hyp.size();
  stats.ref_len = ref.size();
  for (std::size_t n = 1; n <= kMaxOrder; ++n) {
    std::map<std::vector<std::string_view>, std::uint64_t> ref_counts;
    for (std::size_t i = 0; i + n <= ref.size(); ++i) {
      ++ref_counts[std::vector<std::string_view>(ref.begin() + i,
                                                 ref.begin() + i + n)];
    }
    std::map<std::vector<std::string_view>, std::uint64_t> hyp_counts;
    for (std::size_t i = 0; i + n <= hyp.size(); ++i) {
      ++hyp_counts[std::vector<std::string_view>(hyp.begin() + i,
                                                 hyp.begin() + i + n)];
    }
    std::uint64_t matched = 0;
    for (const auto& [gram, count] : hyp_counts) {
      const auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matched += std::min(count, it->second);
    }
    stats.matches[n - 1] = matched;
    stats.totals[n - 1] = hyp.size() >= n ? hyp.size() - n + 1 : 0;
  }
  return stats;
}

BleuReport bleu_from_stats(const NgramStats& stats) {
  BleuReport report;
  report.hyp_len = stats.hyp_len;
  report.ref_len = stats.ref_len;
  bool any_zero = false;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    const double p = stats.totals[n] == 0
                         ? 0.0
                         : static_cast<double>(stats.matches[n]) /
                               static_cast<double>(stats.totals[n]);
    report.precisions[n] = p;
    if (p == 0.0) any_zero = true;
    log_sum += log_or_neg_inf(p);
  }
  if (stats.hyp_len == 0) {
    report.brevity_penalty = 0.0;
  } else if (stats.hyp_len < stats.ref_len) {
    report.brevity_penalty =
        std::exp(1.0 - static_cast<double>(stats.ref_len) /
                           static_cast<double>(stats.hyp_len));
  } else {
    report.brevity_penalty = 1.0;
  }
  report.score = any_zero ? 0.0
                          : report.brevity_penalty *
                                std::exp(log_sum / static_cast<double>(kMaxOrder)) *
                                100.0;
  return report;
}

namespace {

std::vector<NgramStats> all_segment_stats(std::span<const std::string> hyps,
                                          std::span<const std::string> refs) {
  if (hyps.size() != refs.size()) {
    fail(ErrorKind::input, "hypothesis and reference counts differ (" +
                               std::to_string(hyps.size()) + " vs " +
                               std::to_string(refs.size()) + ")");
  }
  if (hyps.empty()) fail(ErrorKind::input, "empty corpus");
  std::vector<NgramStats> out;
  out.reserve(hyps.size());
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    out.push_back(segment_stats(tokenize_13a(hyps[i]), tokenize_13a(refs[i])));
  }
  return out;
}

double bleu_of(std::span<const NgramStats> stats,
               std::span<const std::size_t> indices) {
  NgramStats sum;
  for (std::size_t i : indices) sum += stats[i];
  return bleu_from_stats(sum).score;
}

double bleu_of(std::span<const NgramStats> stats) {
  NgramStats sum;
  for (const auto& s : stats) sum += s;
  return bleu_from_stats(sum).score;
}

}  // namespace

BleuReport corpus_bleu(std::span<const std::string> hyps,
                       std::span<const std::string> refs) {
  NgramStats sum;
  for (const auto& s : all_segment_stats(hyps, refs)) sum += s;
  return bleu_from_stats(sum);
}

double smoothed_sentence_bleu(std::span<const std::string> hyp,
                              std::span<const std::string> ref) {
  const NgramStats stats = segment_stats(hyp, ref);
  double log_sum = 0.0;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    log_sum += std::log((static_cast<double>(stats.matches[n]) + 1.0) /
                        (static_cast<double>(stats.totals[n]) + 1.0));
  }
  double bp = 1.0;
  if (hyp.empty()) {
    return 0.0;
  } else if (hyp.size() < ref.size()) {
    bp = std::exp(1.0 - static_cast<double>(ref.size()) /
                            static_cast<double>(hyp.size()));
  }
  return bp * std::exp(log_sum / static_cast<double>(kMaxOrder));
}

std::vector<std::vector<std::size_t>> draw_resamples(std::size_t n_segments,
                                                     std::size_t n_resamples,
                                                     std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> out(n_resamples);
  for (std::size_t r = 0; r < n_resamples; ++r) {
    Rng rng(derive_seed(seed, r));
    out[r].resize(n_segments);
    for (auto& idx : out[r]) idx = rng.index(n_segments);
  }
  return out;
}

SignificanceResult paired_bootstrap(
    std::span<const NgramStats> stats_a, std::span<const NgramStats> stats_b,
    std::span<const std::vector<std::size_t>> resamples) {
  if (stats_a.size() != stats_b.size()) {
    fail(ErrorKind::input, "systems have different segment counts");
  }
  SignificanceResult result;
  result.bleu_a = bleu_of(stats_a);
  result.bleu_b = bleu_of(stats_b);
  result.resamples = resamples.size();
  result.reversed = result.bleu_b > result.bleu_a;
  const auto better = result.reversed ? stats_b : stats_a;
  const auto worse = result.reversed ? stats_a : stats_b;

  std::size_t not_better = 0;
  for (const auto& indices : resamples) {
    if (bleu_of(better, indices) - bleu_of(worse, indices) <= 0.0) ++not_better;
  }
  result.p_value = resamples.empty()
                       ? 1.0
                       : static_cast<double>(not_better) /
                             static_cast<double>(resamples.size());
  return result;
}

SignificanceResult bootstrap_significance(std::span<const std::string> hyps_a,
                                          std::span<const std::string> hyps_b,
                                          std::span<const std::string> refs,
                                          std::size_t n_resamples,
                                          std::uint64_t seed) {
  if (n_resamples < 100) {
    fail(ErrorKind::config, "bootstrap needs at least 100 resamples");
  }
  if (hyps_a.size() != hyps_b.size()) {
    fail(ErrorKind::input, "systems have different segment counts");
  }
  const auto stats_a = all_segment_stats(hyps_a, refs);
  const auto stats_b = all_segment_stats(hyps_b, refs);
  const auto resamples = draw_resamples(refs.size(), n_resamples, seed);
  return paired_bootstrap(stats_a, stats_b, resamples);
}

std::string format_report(const BleuReport& report) {
  std::ostringstream out;
  out << "bleu: " << format_double(report.score) << '\n';
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    out << "precision_" << n + 1 << ": " << format_double(report.precisions[n])
        << '\n';
  }
  out << "brevity_penalty: " << format_double(report.brevity_penalty) << '\n'
      << "hyp_len: " << report.hyp_len << '\n'
      << "ref_len: " << report.ref_len << '\n';
  return out.str();
}

std::string format_report(const SignificanceResult& result) {
  std::ostringstream out;
  out << "bleu_a: " << format_double(result.bleu_a) << '\n'
      << "bleu_b: " << format_double(result.bleu_b) << '\n'
      << "better: " << (result.reversed ? "b" : "a") << '\n'
      << "resamples: " << result.resamples << '\n'
      << "p_value: " << format_double(result.p_value) << '\n';
  return out.str();
}

}  // namespace secmt::eval
