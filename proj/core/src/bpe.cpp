#include "secmt/bpe.hpp"

#include <istream>
#include <ostream>
#include <set>
#include <tuple>

#include "secmt/error.hpp"
#include "secmt/text.hpp"

namespace secmt::bpe {

namespace {

struct WordEntry {
  std::vector<std::string> symbols;
  std::uint64_t count = 0;
};

using PairCounts = std::map<SymbolPair, std::int64_t>;

void add_pairs(const WordEntry& word, std::size_t word_id, std::int64_t sign,
               PairCounts& counts,
               std::map<SymbolPair, std::set<std::size_t>>& where) {
  for (std::size_t i = 0; i + 1 < word.symbols.size(); ++i) {
    SymbolPair pair{word.symbols[i], word.symbols[i + 1]};
    counts[pair] += sign * static_cast<std::int64_t>(word.count);
    if (sign > 0) where[pair].insert(word_id);
  }
}

std::vector<std::string> merge_pair(const std::vector<std::string>& symbols,
                                    const SymbolPair& pair) {
  std::vector<std::string> out;
  out.reserve(symbols.size());
  std::size_t i = 0;
  while (i < symbols.size()) {
    if (i + 1 < symbols.size() && symbols[i] == pair.first &&
        symbols[i + 1] == pair.second) {
      out.push_back(pair.first + pair.second);
      i += 2;
    } else {
      out.push_back(symbols[i]);
      ++i;
    }
  }
  return out;
}

}  // namespace

MergeTable learn_bpe(const WordCounts& vocabulary, std::size_t num_merges) {
  MergeTable table;
  std::vector<WordEntry> words;
  for (const auto& [word, count] : vocabulary) {
    if (word.empty() || count == 0 || is_protected_token(word)) continue;
    words.push_back({text::utf8_chars(word), count});
  }

  PairCounts counts;
  std::map<SymbolPair, std::set<std::size_t>> where;
  for (std::size_t w = 0; w < words.size(); ++w) {
    add_pairs(words[w], w, +1, counts, where);
  }
  // Max-heap keyed by (count desc, pair asc).
  using Key = std::tuple<std::int64_t, SymbolPair>;
  auto cmp = [](const Key& a, const Key& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::get<1>(a) < std::get<1>(b);
  };
  std::set<Key, decltype(cmp)> queue(cmp);
  for (const auto& [pair, count] : counts) {
    if (count > 0) queue.insert({count, pair});
  }

  while (table.merges.size() < num_merges && !queue.empty()) {
    const auto [best_count, best] = *queue.begin();
    if (best_count < 2) break;
    table.merges.push_back(best);

    const auto affected = where[best];
    PairCounts delta;
    for (std::size_t w : affected) {
      auto& word = words[w];
      for (std::size_t i = 0; i + 1 < word.symbols.size(); ++i) {
        delta[{word.symbols[i], word.symbols[i + 1]}] -=
            static_cast<std::int64_t>(word.count);
      }
      word.symbols = merge_pair(word.symbols, best);
      for (std::size_t i = 0; i + 1 < word.symbols.size(); ++i) {
        SymbolPair pair{word.symbols[i], word.symbols[i + 1]};
        delta[pair] += static_cast<std::int64_t>(word.count);
        where[pair].insert(w);
      }
    }
    for (const auto& [pair, change] : delta) {
      if (change == 0) continue;
      auto& count = counts[pair];
      if (count > 0) queue.erase({count, pair});
      count += change;
      if (count > 0) queue.insert({count, pair});
    }
    where.erase(best);
  }
  return table;
}

bool is_protected_token(std::string_view token) {
  if (token.size() < 3 || token.front() != '<' || token.back() != '>') return false;
  for (std::size_t i = 1; i + 1 < token.size(); ++i) {
    const char c = token[i];
    if (c == '<' || c == '>' || c == ' ' || c == '\t' || c == '\n') return false;
  }
  return true;
}

std::size_t Segmenter::PairHash::operator()(const SymbolPair& p) const noexcept {
  const std::size_t h1 = std::hash<std::string>{}(p.first);
  const std::size_t h2 = std::hash<std::string>{}(p.second);
  return h1 ^ (h2 + 0x9e3779b97f4a7c15ULL + (h1 << 6) + (h1 >> 2));
}

Segmenter::Segmenter(const MergeTable& table) : marker_(table.marker) {
  for (std::size_t i = 0; i < table.merges.size(); ++i) {
    ranks_.emplace(table.merges[i], i);  // first occurrence wins
  }
}

std::vector<std::string> Segmenter::segment(std::string_view word) const {
  if (word.empty()) return {};
  if (is_protected_token(word)) return {std::string(word)};
  std::vector<std::string> symbols = text::utf8_chars(word);
  while (symbols.size() > 1) {
    std::size_t best_rank = SIZE_MAX;
    std::size_t best_at = 0;
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      const auto it = ranks_.find({symbols[i], symbols[i + 1]});
      if (it != ranks_.end() && it->second < best_rank) {
        best_rank = it->second;
        best_at = i;
      }
    }
    if (best_rank == SIZE_MAX) break;
    symbols = merge_pair(symbols, {symbols[best_at], symbols[best_at + 1]});
  }
  for (std::size_t i = 0; i + 1 < symbols.size(); ++i) symbols[i] += marker_;
  return symbols;
}

std::vector<std::string> Segmenter::segment_sentence(
    std::span<const std::string> words) const {
  std::vector<std::string> out;
  for (const auto& w : words) {
    auto pieces = segment(w);
    out.insert(out.end(), std::make_move_iterator(pieces.begin()),
               std::make_move_iterator(pieces.end()));
  }
  return out;
}

std::vector<std::string> apply_bpe(std::string_view word, const MergeTable& table) {
  return Segmenter(table).segment(word);
}

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return !suffix.empty() && s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::string undo_bpe(std::span<const std::string> subwords, std::string_view marker) {
  std::string word;
  for (std::size_t i = 0; i < subwords.size(); ++i) {
    std::string_view piece = subwords[i];
    if (i + 1 < subwords.size() && ends_with(piece, marker)) {
      piece.remove_suffix(marker.size());
    }
    word.append(piece);
  }
  return word;
}

std::vector<std::vector<std::string>> group_words(std::span<const std::string> tokens,
                                                  std::string_view marker) {
  std::vector<std::vector<std::string>> words;
  std::vector<std::string> current;
  for (const auto& token : tokens) {
    current.push_back(token);
    if (!ends_with(token, marker) || is_protected_token(token)) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::vector<std::string> undo_bpe_sentence(std::span<const std::string> tokens,
                                           std::string_view marker) {
  std::vector<std::string> out;
  for (const auto& pieces : group_words(tokens, marker)) {
    out.push_back(undo_bpe(pieces, marker));
  }
  return out;
}

void write_merge_table(std::ostream& out, const MergeTable& table,
                       std::string_view config_hash) {
  out << "version 1";
  if (!config_hash.empty()) out << " config=" << config_hash;
  out << '\n';
  for (const auto& [left, right] : table.merges) out << left << ' ' << right << '\n';
}

MergeTable read_merge_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::data, "empty merge table");
  const auto header = text::split_whitespace(line);
  if (header.size() < 2 || header[0] != "version" || header[1] != "1") {
    fail(ErrorKind::data, "merge table must start with 'version 1'");
  }
  MergeTable table;
  std::set<SymbolPair> seen;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto space = line.find(' ');
    if (space == std::string::npos || space == 0 || space + 1 == line.size() ||
        line.find(' ', space + 1) != std::string::npos) {
      fail(ErrorKind::data, "malformed merge line: '" + line + "'");
    }
    SymbolPair pair{line.substr(0, space), line.substr(space + 1)};
    if (!seen.insert(pair).second) {
      fail(ErrorKind::data, "duplicate merge: '" + line + "'");
    }
    table.merges.push_back(std::move(pair));
  }
  return table;
}

}  // namespace secmt::bpe
