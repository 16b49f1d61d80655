#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "secmt/resources.hpp"

namespace secmt {

struct Sentence {
  std::string text;
  std::vector<std::string> tokens;
  std::string doc_id;
  std::size_t section_index = 0;
  std::size_t sentence_index = 0;
};

// Sections are flat: a sub-sub-heading opens a section just like a
// top-level heading. heading_depth is kept for debugging only.
struct Section {
  std::string heading;
  std::size_t section_index = 0;
  int heading_depth = 0;
  std::vector<Sentence> sentences;
};

struct Document {
  std::string doc_id;
  std::string lang;
  std::vector<std::string> categories;
  std::vector<Section> sections;

  std::size_t sentence_count() const;
};

using StructuredCorpus = std::vector<Document>;

// Half-open range of sentence indices.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool operator==(const Span&) const = default;
};

struct AlignmentBead {
  Span source;
  Span target;
  double score = 0.0;  // similarity of the bead in [0, 1]; 0 for skips

  bool operator==(const AlignmentBead&) const = default;
};

struct SentencePair {
  Sentence source;
  Sentence target;
  double score = 0.0;
};

struct ParallelCorpus {
  std::vector<SentencePair> pairs;
};

// --- parsing -------------------------------------------------------------

// Rule-based splitter: a sentence ends at . ! ? (plus any closing quotes or
// brackets) followed by whitespace or end of text, unless the word before a
// '.' is a listed abbreviation or a single letter. 。！？ end a sentence
// with or without trailing whitespace; a blank line always does.
std::vector<std::string> split_sentences(std::string_view body,
                                         const WordSet& abbreviations);

// Lightweight wikitext: plain text with "== Heading ==" markers of depth 2 to
// 6. Text before the first heading is section 0 with an empty heading.
// Unbalanced markers are ordinary text.
Document parse_wikitext_lite(std::string_view raw, std::string doc_id,
                             std::string lang);
Document parse_wikitext_lite(std::string_view raw, std::string doc_id,
                             std::string lang, const WordSet& abbreviations);

// Removes heading markers and returns the body text with whitespace
// normalized; the concatenated sentence texts of the parsed document equal
// this string.
std::string strip_headings(std::string_view raw);

bool is_biography(const Document& doc, std::span<const std::string> keywords);

// --- cleaning ------------------------------------------------------------

struct CleaningOptions {
  std::size_t min_len = 1;
  std::size_t max_len = 80;
  double max_ratio = 9.0;

  void validate() const;
};

// Indices of the pairs that survive cleaning, in order.
std::vector<std::size_t> clean_parallel_indices(const ParallelCorpus& corpus,
                                                const CleaningOptions& options);
ParallelCorpus clean_parallel(const ParallelCorpus& corpus,
                              const CleaningOptions& options);

// --- sentence alignment --------------------------------------------------

using SentenceSimilarity =
    std::function<double(const Sentence& source, const Sentence& target)>;

// Smoothed sentence BLEU of the source tokens against the target tokens.
double bleu_similarity(const Sentence& source, const Sentence& target);

struct AlignOptions {
  double skip_penalty = 0.15;
};

// Monotone DP over 1-1, 1-0, 0-1, 2-1 and 1-2 beads maximising the summed
// bead score (similarity for matches, -skip_penalty for skips). Two
// sentences are merged into one bead side only when they share a document
// and section.
std::vector<AlignmentBead> align_sentences(std::span<const Sentence> source,
                                           std::span<const Sentence> target,
                                           const SentenceSimilarity& similarity,
                                           const AlignOptions& options = {});
std::vector<AlignmentBead> align_sentences(std::span<const Sentence> source,
                                           std::span<const Sentence> target);

// Concatenates texts and tokens; provenance is that of the first sentence.
Sentence merge_sentences(std::span<const Sentence> sentences);

// Spans index into the given sentence lists; skip beads produce no pair.
ParallelCorpus pairs_from_beads(std::span<const Sentence> source,
                                std::span<const Sentence> target,
                                std::span<const AlignmentBead> beads);

std::vector<Sentence> flatten(const Document& doc);

// --- files ---------------------------------------------------------------

// Corpus file: a header line then one JSON object per sentence with keys
// doc_id, lang, section_index, heading, sentence_index, text. Optional keys:
// "tokens" (defaults to the 13a tokenization of text) and "categories" (on
// the first record of a document).
void write_corpus(std::ostream& out, const StructuredCorpus& corpus,
                  std::string_view config_hash);
StructuredCorpus read_corpus(std::istream& in);

// One link per bead; spans are section-relative sentence indices.
// Ingest input: one JSON object per line with doc_id, optional lang,
// optional categories and the raw wikitext-lite text of the article.
struct RawDocument {
  std::string doc_id;
  std::string lang;
  std::vector<std::string> categories;
  std::string text;
};

void write_raw_documents(std::ostream& out, std::span<const RawDocument> docs);
std::vector<RawDocument> read_raw_documents(std::istream& in);

struct BeadLink {
  std::string doc_id;
  std::size_t source_section = 0;
  Span source;
  std::size_t target_section = 0;
  Span target;
  double score = 0.0;
};

void write_links(std::ostream& out, std::span<const BeadLink> links,
                 std::string_view config_hash);
std::vector<BeadLink> read_links(std::istream& in);

// Converts document-level beads (over flatten(doc)) into section-relative
// links. Skip beads are dropped.
std::vector<BeadLink> links_from_beads(const Document& source,
                                       const Document& target,
                                       std::span<const AlignmentBead> beads);

// Resolves links against the two corpora into sentence pairs, in link order.
ParallelCorpus resolve_links(const StructuredCorpus& source,
                             const StructuredCorpus& target,
                             std::span<const BeadLink> links);

}  // namespace secmt
