#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace secmt::bpe {

using SymbolPair = std::pair<std::string, std::string>;

// Ordered merge operations; index 0 has the highest priority. Merges act
// on code point sequences; the continuation marker is attached only when
// a segmentation is emitted.
struct MergeTable {
  std::vector<SymbolPair> merges;
  std::string marker = "@@";

  bool operator==(const MergeTable&) const = default;
};

using WordCounts = std::map<std::string, std::uint64_t>;

// Greedy most-frequent-pair learning. Stops after num_merges merges or when
// no pair occurs at least twice. Ties go to the lexicographically smallest
// (left, right) pair.
MergeTable learn_bpe(const WordCounts& vocabulary, std::size_t num_merges);

// Side-constraint tags ("<topic64>"), sentence markers and other
// "<...>" tokens are atomic and never segmented.
bool is_protected_token(std::string_view token);

// Applies a merge table; construct once and reuse.
class Segmenter {
 public:
  explicit Segmenter(const MergeTable& table);

  std::vector<std::string> segment(std::string_view word) const;
  std::vector<std::string> segment_sentence(std::span<const std::string> words) const;
  const std::string& marker() const { return marker_; }

 private:
  struct PairHash {
    std::size_t operator()(const SymbolPair& p) const noexcept;
  };
  std::unordered_map<SymbolPair, std::size_t, PairHash> ranks_;
  std::string marker_;
};

std::vector<std::string> apply_bpe(std::string_view word, const MergeTable& table);

// Joins the subwords of one word, stripping the marker from every piece but
// the last.
std::string undo_bpe(std::span<const std::string> subwords,
                     std::string_view marker = "@@");

// Regroups a segmented sentence into words.
std::vector<std::string> undo_bpe_sentence(std::span<const std::string> tokens,
                                           std::string_view marker = "@@");

// Groups a segmented sentence into per-word runs of subwords.
std::vector<std::vector<std::string>> group_words(
    std::span<const std::string> tokens, std::string_view marker = "@@");

// "version 1[ config=<hash>]" then one "left right" line per merge.
void write_merge_table(std::ostream& out, const MergeTable& table,
                       std::string_view config_hash = {});
MergeTable read_merge_table(std::istream& in);

}  // namespace secmt::bpe
