#include "secmt/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

#include <json.hpp>

#include "secmt/error.hpp"
#include "secmt/eval.hpp"
#include "secmt/text.hpp"

namespace secmt {

using nlohmann::json;

std::size_t Document::sentence_count() const {
  std::size_t n = 0;
  for (const auto& s : sections) n += s.sentences.size();
  return n;
}

// --- parsing -------------------------------------------------------------

namespace {

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

struct Segment {
  bool is_heading = false;
  int depth = 0;
  std::string text;  // heading title or body text
};

// Splits raw text into alternating body and heading segments.
std::vector<Segment> scan_headings(std::string_view raw) {
  std::vector<Segment> segments;
  std::string body;
  std::size_t i = 0;
  while (i < raw.size()) {
    if (raw[i] != '=' || (i > 0 && !is_ascii_space(raw[i - 1]))) {
      body.push_back(raw[i++]);
      continue;
    }
    std::size_t run = 0;
    while (i + run < raw.size() && raw[i + run] == '=') ++run;
    bool matched = false;
    if (run >= 2 && run <= 6) {
      const std::size_t title_begin = i + run;
      std::size_t j = title_begin;
      while (j < raw.size() && raw[j] != '=' && raw[j] != '\n') ++j;
      if (j < raw.size() && raw[j] == '=') {
        std::size_t close = 0;
        while (j + close < raw.size() && raw[j + close] == '=') ++close;
        const std::size_t after = j + close;
        const auto title = text::trim(raw.substr(title_begin, j - title_begin));
        if (close == run && !title.empty() &&
            (after == raw.size() || is_ascii_space(raw[after]))) {
          segments.push_back({false, 0, std::move(body)});
          body.clear();
          segments.push_back({true, static_cast<int>(run), std::string(title)});
          i = after;
          matched = true;
        }
      }
    }
    if (!matched) {
      body.append(raw.substr(i, run));
      i += run;
    }
  }
  segments.push_back({false, 0, std::move(body)});
  return segments;
}

bool is_closer(char32_t c) {
  switch (c) {
    case U'"': case U'\'': case U')': case U']': case U'}':
    case U'»': case U'’': case U'”': case U'›':
    case U'」': case U'』': case U'）': case U'】':
      return true;
    default:
      return false;
  }
}

bool is_opener(char32_t c) {
  switch (c) {
    case U'"': case U'\'': case U'(': case U'[': case U'{':
    case U'«': case U'‘': case U'“': case U'‹':
    case U'「': case U'『': case U'（': case U'【':
      return true;
    default:
      return false;
  }
}

bool is_ascii_terminal(char32_t c) { return c == U'.' || c == U'!' || c == U'?'; }
bool is_wide_terminal(char32_t c) {
  return c == U'。' || c == U'！' || c == U'？';
}

bool is_letter(char32_t c) {
  return !text::is_space(c) && !text::is_punctuation(c) &&
         !(c >= U'0' && c <= U'9');
}

// The word that ends right before position `dot` (exclusive).
std::u32string word_before(const std::u32string& s, std::size_t dot) {
  std::size_t begin = dot;
  while (begin > 0 && !text::is_space(s[begin - 1])) --begin;
  while (begin < dot && is_opener(s[begin])) ++begin;
  return s.substr(begin, dot - begin);
}

bool is_abbreviation(const std::u32string& word, const WordSet& abbreviations) {
  if (word.empty()) return false;
  if (word.size() == 1 && is_letter(word[0])) return true;
  return abbreviations.count(text::to_lower(text::encode_utf8(word))) > 0;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view body,
                                         const WordSet& abbreviations) {
  const std::u32string s = text::decode_utf8(body);
  std::vector<std::string> sentences;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    auto sentence = text::normalize_whitespace(
        text::encode_utf8(std::u32string_view(s).substr(start, end - start)));
    if (!sentence.empty()) sentences.push_back(std::move(sentence));
    start = end;
  };

  std::size_t i = 0;
  while (i < s.size()) {
    const char32_t c = s[i];
    if (c == U'\n') {
      std::size_t j = i + 1;
      while (j < s.size() && s[j] != U'\n' && text::is_space(s[j])) ++j;
      if (j < s.size() && s[j] == U'\n') {
        emit(i);
        i = j + 1;
        continue;
      }
      ++i;
      continue;
    }
    if (is_wide_terminal(c)) {
      std::size_t j = i + 1;
      while (j < s.size() && (is_wide_terminal(s[j]) || is_closer(s[j]))) ++j;
      emit(j);
      i = j;
      continue;
    }
    if (is_ascii_terminal(c)) {
      std::size_t j = i;
      while (j < s.size() && is_ascii_terminal(s[j])) ++j;
      const bool single_period = (j - i == 1) && c == U'.';
      while (j < s.size() && is_closer(s[j])) ++j;
      const bool at_boundary = j == s.size() || text::is_space(s[j]);
      if (at_boundary &&
          !(single_period && is_abbreviation(word_before(s, i), abbreviations))) {
        emit(j);
      }
      i = j;
      continue;
    }
    ++i;
  }
  emit(s.size());
  return sentences;
}

Document parse_wikitext_lite(std::string_view raw, std::string doc_id,
                             std::string lang) {
  const auto abbrev = abbreviations(lang);
  return parse_wikitext_lite(raw, std::move(doc_id), std::move(lang), abbrev);
}

Document parse_wikitext_lite(std::string_view raw, std::string doc_id,
                             std::string lang, const WordSet& abbreviations) {
  Document doc;
  doc.doc_id = std::move(doc_id);
  doc.lang = std::move(lang);
  if (text::trim(raw).empty()) return doc;

  for (auto& segment : scan_headings(raw)) {
    if (segment.is_heading || doc.sections.empty()) {
      Section section;
      section.section_index = doc.sections.size();
      if (segment.is_heading) {
        section.heading = segment.text;
        section.heading_depth = segment.depth;
      }
      doc.sections.push_back(std::move(section));
      if (segment.is_heading) continue;
    }
    Section& section = doc.sections.back();
    for (auto& sentence_text : split_sentences(segment.text, abbreviations)) {
      Sentence sentence;
      sentence.tokens = eval::tokenize_13a(sentence_text);
      sentence.text = std::move(sentence_text);
      sentence.doc_id = doc.doc_id;
      sentence.section_index = section.section_index;
      sentence.sentence_index = section.sentences.size();
      section.sentences.push_back(std::move(sentence));
    }
  }
  return doc;
}

std::string strip_headings(std::string_view raw) {
  std::vector<std::string> bodies;
  for (const auto& segment : scan_headings(raw)) {
    if (!segment.is_heading) bodies.push_back(segment.text);
  }
  return text::normalize_whitespace(text::join(bodies, " "));
}

bool is_biography(const Document& doc, std::span<const std::string> keywords) {
  if (keywords.empty()) fail(ErrorKind::config, "biography keyword list is empty");
  for (const auto& category : doc.categories) {
    const auto lowered = text::to_lower(category);
    for (const auto& keyword : keywords) {
      if (lowered.find(text::to_lower(keyword)) != std::string::npos) return true;
    }
  }
  return std::any_of(doc.sections.begin(), doc.sections.end(),
                     [](const Section& s) {
                       return text::iequals(text::trim(s.heading), "biography");
                     });
}

// --- cleaning ------------------------------------------------------------

void CleaningOptions::validate() const {
  if (min_len < 1) fail(ErrorKind::config, "min_len must be at least 1");
  if (max_len < min_len) fail(ErrorKind::config, "max_len must be >= min_len");
  if (!(max_ratio > 1.0)) fail(ErrorKind::config, "max_ratio must exceed 1");
}

std::vector<std::size_t> clean_parallel_indices(const ParallelCorpus& corpus,
                                                const CleaningOptions& options) {
  options.validate();
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
    const std::size_t ls = corpus.pairs[i].source.tokens.size();
    const std::size_t lt = corpus.pairs[i].target.tokens.size();
    const auto in_bounds = [&](std::size_t n) {
      return n >= options.min_len && n <= options.max_len;
    };
    if (!in_bounds(ls) || !in_bounds(lt)) continue;
    const double ratio = static_cast<double>(std::max(ls, lt)) /
                         static_cast<double>(std::min(ls, lt));
    if (ratio <= options.max_ratio) kept.push_back(i);
  }
  return kept;
}

ParallelCorpus clean_parallel(const ParallelCorpus& corpus,
                              const CleaningOptions& options) {
  ParallelCorpus out;
  for (std::size_t i : clean_parallel_indices(corpus, options)) {
    out.pairs.push_back(corpus.pairs[i]);
  }
  return out;
}

// --- alignment -----------------------------------------------------------

double bleu_similarity(const Sentence& source, const Sentence& target) {
  return eval::smoothed_sentence_bleu(source.tokens, target.tokens);
}

Sentence merge_sentences(std::span<const Sentence> sentences) {
  if (sentences.empty()) return {};
  Sentence merged = sentences.front();
  for (std::size_t i = 1; i < sentences.size(); ++i) {
    merged.text += ' ';
    merged.text += sentences[i].text;
    merged.tokens.insert(merged.tokens.end(), sentences[i].tokens.begin(),
                         sentences[i].tokens.end());
  }
  return merged;
}

namespace {

struct BeadShape {
  std::size_t source;
  std::size_t target;
};

// Evaluation order doubles as the tie-break order.
constexpr BeadShape kShapes[] = {{1, 1}, {1, 0}, {0, 1}, {2, 1}, {1, 2}};

bool mergeable(std::span<const Sentence> sentences, std::size_t end,
               std::size_t count) {
  if (count < 2) return true;
  const Sentence& a = sentences[end - 2];
  const Sentence& b = sentences[end - 1];
  return a.doc_id == b.doc_id && a.section_index == b.section_index;
}

double clamp_unit(double x) {
  if (!(x >= 0.0)) return 0.0;  // also maps NaN to 0
  return std::min(x, 1.0);
}

}  // namespace

std::vector<AlignmentBead> align_sentences(std::span<const Sentence> source,
                                           std::span<const Sentence> target,
                                           const SentenceSimilarity& similarity,
                                           const AlignOptions& options) {
  const std::size_t n = source.size();
  const std::size_t m = target.size();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const std::size_t width = m + 1;
  std::vector<double> best((n + 1) * width, kNegInf);
  std::vector<int> back((n + 1) * width, -1);
  std::vector<double> bead_score((n + 1) * width, 0.0);
  best[0] = 0.0;

  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= m; ++j) {
      if (i == 0 && j == 0) continue;
      const std::size_t cell = i * width + j;
      for (int k = 0; k < static_cast<int>(std::size(kShapes)); ++k) {
        const auto shape = kShapes[k];
        if (shape.source > i || shape.target > j) continue;
        const std::size_t pi = i - shape.source;
        const std::size_t pj = j - shape.target;
        const double prev = best[pi * width + pj];
        if (prev == kNegInf) continue;
        if (!mergeable(source, i, shape.source) ||
            !mergeable(target, j, shape.target)) {
          continue;
        }
        double score = 0.0;
        double contribution = 0.0;
        if (shape.source == 0 || shape.target == 0) {
          contribution = -options.skip_penalty;
        } else {
          const Sentence s = merge_sentences(source.subspan(pi, shape.source));
          const Sentence t = merge_sentences(target.subspan(pj, shape.target));
          score = clamp_unit(similarity(s, t));
          contribution = score;
        }
        if (prev + contribution > best[cell]) {
          best[cell] = prev + contribution;
          back[cell] = k;
          bead_score[cell] = score;
        }
      }
    }
  }

  std::vector<AlignmentBead> beads;
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    const std::size_t cell = i * width + j;
    const int k = back[cell];
    if (k < 0) fail(ErrorKind::invariant, "alignment backtrace broke");
    const auto shape = kShapes[k];
    beads.push_back({{i - shape.source, i}, {j - shape.target, j}, bead_score[cell]});
    i -= shape.source;
    j -= shape.target;
  }
  std::reverse(beads.begin(), beads.end());
  return beads;
}

std::vector<AlignmentBead> align_sentences(std::span<const Sentence> source,
                                           std::span<const Sentence> target) {
  return align_sentences(source, target, bleu_similarity);
}

ParallelCorpus pairs_from_beads(std::span<const Sentence> source,
                                std::span<const Sentence> target,
                                std::span<const AlignmentBead> beads) {
  ParallelCorpus out;
  for (const auto& bead : beads) {
    if (bead.source.size() == 0 || bead.target.size() == 0) continue;
    if (bead.source.end > source.size() || bead.target.end > target.size()) {
      fail(ErrorKind::input, "bead span out of range");
    }
    out.pairs.push_back(
        {merge_sentences(source.subspan(bead.source.begin, bead.source.size())),
         merge_sentences(target.subspan(bead.target.begin, bead.target.size())),
         bead.score});
  }
  return out;
}

std::vector<Sentence> flatten(const Document& doc) {
  std::vector<Sentence> out;
  for (const auto& section : doc.sections) {
    out.insert(out.end(), section.sentences.begin(), section.sentences.end());
  }
  return out;
}

// --- files ---------------------------------------------------------------

namespace {

constexpr std::string_view kCorpusFormat = "secmt-corpus";
constexpr std::string_view kLinksFormat = "secmt-links";
constexpr int kFormatVersion = 1;

void write_header(std::ostream& out, std::string_view format,
                  std::string_view config_hash) {
  json header = {{"format", format},
                 {"version", kFormatVersion},
                 {"config", config_hash}};
  out << header.dump() << '\n';
}

// Returns the first non-header record line, if the stream had a header.
void check_header(const json& record, std::string_view format) {
  if (record.value("format", "") != format) {
    fail(ErrorKind::data, "expected a " + std::string(format) + " file");
  }
  if (record.value("version", 0) != kFormatVersion) {
    fail(ErrorKind::data, "unsupported " + std::string(format) + " version");
  }
}

template <typename Fn>
void for_each_record(std::istream& in, std::string_view format, Fn fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(ErrorKind::data, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (line_no == 1 && record.contains("format")) {
      check_header(record, format);
      continue;
    }
    try {
      fn(record);
    } catch (const json::exception& e) {
      fail(ErrorKind::data, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

void write_corpus(std::ostream& out, const StructuredCorpus& corpus,
                  std::string_view config_hash) {
  write_header(out, kCorpusFormat, config_hash);
  for (const auto& doc : corpus) {
    bool first = true;
    for (const auto& section : doc.sections) {
      for (const auto& sentence : section.sentences) {
        json record = {{"doc_id", doc.doc_id},
                       {"lang", doc.lang},
                       {"section_index", section.section_index},
                       {"heading", section.heading},
                       {"sentence_index", sentence.sentence_index},
                       {"text", sentence.text}};
        if (sentence.tokens != eval::tokenize_13a(sentence.text)) {
          record["tokens"] = sentence.tokens;
        }
        if (first && !doc.categories.empty()) {
          record["categories"] = doc.categories;
        }
        first = false;
        out << record.dump() << '\n';
      }
    }
  }
}

StructuredCorpus read_corpus(std::istream& in) {
  StructuredCorpus corpus;
  std::map<std::string, bool> seen;
  for_each_record(in, kCorpusFormat, [&](const json& r) {
    const auto doc_id = r.at("doc_id").get<std::string>();
    if (corpus.empty() || corpus.back().doc_id != doc_id) {
      if (seen.count(doc_id)) {
        fail(ErrorKind::data, "records of document " + doc_id + " are not contiguous");
      }
      seen[doc_id] = true;
      Document doc;
      doc.doc_id = doc_id;
      doc.lang = r.at("lang").get<std::string>();
      corpus.push_back(std::move(doc));
    }
    Document& doc = corpus.back();
    if (r.contains("categories")) {
      doc.categories = r.at("categories").get<std::vector<std::string>>();
    }
    const auto section_index = r.at("section_index").get<std::size_t>();
    if (!doc.sections.empty() && section_index < doc.sections.back().section_index) {
      fail(ErrorKind::data, "sections of " + doc_id + " out of order");
    }
    while (doc.sections.size() <= section_index) {
      Section s;
      s.section_index = doc.sections.size();
      doc.sections.push_back(std::move(s));
    }
    Section& section = doc.sections[section_index];
    section.heading = r.at("heading").get<std::string>();
    Sentence sentence;
    sentence.text = r.at("text").get<std::string>();
    sentence.tokens = r.contains("tokens")
                          ? r.at("tokens").get<std::vector<std::string>>()
                          : eval::tokenize_13a(sentence.text);
    sentence.doc_id = doc_id;
    sentence.section_index = section_index;
    sentence.sentence_index = r.at("sentence_index").get<std::size_t>();
    if (sentence.sentence_index != section.sentences.size()) {
      fail(ErrorKind::data, "sentence indices of " + doc_id + " section " +
                                std::to_string(section_index) +
                                " are not contiguous");
    }
    section.sentences.push_back(std::move(sentence));
  });
  return corpus;
}

void write_raw_documents(std::ostream& out, std::span<const RawDocument> docs) {
  for (const auto& doc : docs) {
    json record = {{"doc_id", doc.doc_id}, {"text", doc.text}};
    if (!doc.lang.empty()) record["lang"] = doc.lang;
    if (!doc.categories.empty()) record["categories"] = doc.categories;
    out << record.dump() << '\n';
  }
}

std::vector<RawDocument> read_raw_documents(std::istream& in) {
  std::vector<RawDocument> docs;
  for_each_record(in, "secmt-raw", [&](const json& record) {
    RawDocument doc;
    doc.doc_id = record.at("doc_id").get<std::string>();
    doc.text = record.at("text").get<std::string>();
    doc.lang = record.value("lang", "");
    if (record.contains("categories")) {
      doc.categories = record.at("categories").get<std::vector<std::string>>();
    }
    if (doc.doc_id.empty()) fail(ErrorKind::data, "raw document without doc_id");
    docs.push_back(std::move(doc));
  });
  return docs;
}

void write_links(std::ostream& out, std::span<const BeadLink> links,
                 std::string_view config_hash) {
  write_header(out, kLinksFormat, config_hash);
  for (const auto& link : links) {
    json record = {{"doc_id", link.doc_id},
                   {"src_section", link.source_section},
                   {"src_span", {link.source.begin, link.source.end}},
                   {"tgt_section", link.target_section},
                   {"tgt_span", {link.target.begin, link.target.end}},
                   {"score", link.score}};
    out << record.dump() << '\n';
  }
}

std::vector<BeadLink> read_links(std::istream& in) {
  std::vector<BeadLink> links;
  for_each_record(in, kLinksFormat, [&](const json& r) {
    BeadLink link;
    link.doc_id = r.at("doc_id").get<std::string>();
    link.source_section = r.at("src_section").get<std::size_t>();
    link.source = {r.at("src_span").at(0).get<std::size_t>(),
                   r.at("src_span").at(1).get<std::size_t>()};
    link.target_section = r.at("tgt_section").get<std::size_t>();
    link.target = {r.at("tgt_span").at(0).get<std::size_t>(),
                   r.at("tgt_span").at(1).get<std::size_t>()};
    link.score = r.at("score").get<double>();
    if (link.source.end < link.source.begin || link.target.end < link.target.begin) {
      fail(ErrorKind::data, "inverted span in link for " + link.doc_id);
    }
    links.push_back(std::move(link));
  });
  return links;
}

std::vector<BeadLink> links_from_beads(const Document& source,
                                       const Document& target,
                                       std::span<const AlignmentBead> beads) {
  const auto src = flatten(source);
  const auto tgt = flatten(target);
  std::vector<BeadLink> links;
  for (const auto& bead : beads) {
    if (bead.source.size() == 0 || bead.target.size() == 0) continue;
    const Sentence& s = src.at(bead.source.begin);
    const Sentence& t = tgt.at(bead.target.begin);
    links.push_back({source.doc_id,
                     s.section_index,
                     {s.sentence_index, s.sentence_index + bead.source.size()},
                     t.section_index,
                     {t.sentence_index, t.sentence_index + bead.target.size()},
                     bead.score});
  }
  return links;
}

namespace {

std::span<const Sentence> lookup(const std::map<std::string, const Document*>& docs,
                                 const std::string& doc_id, std::size_t section,
                                 const Span& span, std::string_view side) {
  const auto it = docs.find(doc_id);
  if (it == docs.end()) {
    fail(ErrorKind::data, "link references unknown " + std::string(side) +
                              " document " + doc_id);
  }
  const Document& doc = *it->second;
  if (section >= doc.sections.size() ||
      span.end > doc.sections[section].sentences.size()) {
    fail(ErrorKind::data, "link span out of range in " + std::string(side) +
                              " document " + doc_id);
  }
  return std::span<const Sentence>(doc.sections[section].sentences)
      .subspan(span.begin, span.size());
}

}  // namespace

ParallelCorpus resolve_links(const StructuredCorpus& source,
                             const StructuredCorpus& target,
                             std::span<const BeadLink> links) {
  std::map<std::string, const Document*> src_docs;
  std::map<std::string, const Document*> tgt_docs;
  for (const auto& d : source) src_docs[d.doc_id] = &d;
  for (const auto& d : target) tgt_docs[d.doc_id] = &d;
  ParallelCorpus out;
  for (const auto& link : links) {
    const auto s = lookup(src_docs, link.doc_id, link.source_section, link.source, "source");
    const auto t = lookup(tgt_docs, link.doc_id, link.target_section, link.target, "target");
    if (s.empty() || t.empty()) continue;
    out.pairs.push_back({merge_sentences(s), merge_sentences(t), link.score});
  }
  return out;
}

}  // namespace secmt
