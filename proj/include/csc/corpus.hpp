#pragma once

#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "csc/common.hpp"

namespace csc {

/// Splits text into maximal runs of non-whitespace characters.
inline std::vector<std::string> tokenize(std::string_view text) {
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

inline std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

struct Sentence {
  std::size_t id = 0;
  std::string text;
  std::vector<std::string> tokens;
  Language language = Language::EN;

  static Sentence make(std::size_t id, std::string text, Language language) {
    Sentence s;
    s.id = id;
    s.tokens = tokenize(text);
    s.text = std::move(text);
    s.language = language;
    return s;
  }
};

struct Corpus {
  std::vector<Sentence> sentences;
  Language language = Language::EN;

  std::size_t size() const { return sentences.size(); }
  bool empty() const { return sentences.empty(); }

  static Corpus from_lines(const std::vector<std::string>& lines, Language language) {
    Corpus c;
    c.language = language;
    for (const auto& line : lines) {
      if (tokenize(line).empty()) continue;
      c.sentences.push_back(Sentence::make(c.sentences.size(), line, language));
    }
    return c;
  }
};

/// Reads a one-sentence-per-line UTF-8 file. Blank lines are skipped and ids
/// are assigned in file order starting at 0. LF and CRLF are both accepted.
inline Corpus load_corpus(const std::filesystem::path& path, Language language) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read corpus file '" + path.string() + "'");
  Corpus corpus;
  corpus.language = language;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (auto bad = detail::find_invalid_utf8(line); bad != std::string_view::npos) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": invalid UTF-8 at byte " +
                  std::to_string(bad + 1));
    }
    if (tokenize(line).empty()) continue;
    corpus.sentences.push_back(Sentence::make(corpus.sentences.size(), line, language));
  }
  if (in.bad()) throw Error("read error on corpus file '" + path.string() + "'");
  return corpus;
}

/// Keeps sentences with strictly fewer than max_tokens tokens. Ids are kept.
inline Corpus filter_by_length(const Corpus& corpus, std::size_t max_tokens) {
  if (max_tokens < 1) throw Error("max_tokens must be >= 1");
  Corpus out;
  out.language = corpus.language;
  for (const auto& s : corpus.sentences) {
    if (s.tokens.size() < max_tokens) out.sentences.push_back(s);
  }
  return out;
}

struct TokenBin {
  std::size_t lower = 0;
  std::optional<std::size_t> upper;  // exclusive; nullopt for the final open bin
  std::size_t count = 0;
  double percentage = 0.0;

  std::string label() const {
    if (!upper) return ">=" + std::to_string(lower);
    return std::to_string(lower) + "-" + std::to_string(*upper);
  }
};

struct TokenBinTable {
  std::vector<TokenBin> bins;
  std::size_t total_sentences = 0;
};

/// Histogram of sentence token counts: closed bins [0,w), [w,2w), ... followed
/// by one open bin starting at closed_bins*w.
inline TokenBinTable token_bin_stats(const Corpus& corpus, std::size_t bin_width = 10,
                                     std::size_t closed_bins = 5) {
  if (corpus.empty()) throw Error("no sentences");
  if (bin_width < 1) throw Error("bin_width must be >= 1");
  TokenBinTable table;
  table.total_sentences = corpus.size();
  for (std::size_t b = 0; b < closed_bins; ++b) {
    table.bins.push_back({b * bin_width, (b + 1) * bin_width, 0, 0.0});
  }
  table.bins.push_back({closed_bins * bin_width, std::nullopt, 0, 0.0});
  for (const auto& s : corpus.sentences) {
    std::size_t b = std::min(s.tokens.size() / bin_width, closed_bins);
    ++table.bins[b].count;
  }
  for (auto& bin : table.bins) {
    bin.percentage = 100.0 * static_cast<double>(bin.count) / static_cast<double>(corpus.size());
  }
  return table;
}

/// Renders one or more token-bin tables side by side, one column per corpus.
inline std::string format_token_bins(const std::vector<std::string>& names,
                                     const std::vector<TokenBinTable>& tables) {
  if (names.size() != tables.size() || tables.empty()) throw Error("format_token_bins: bad input");
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"# Tokens"};
  header.insert(header.end(), names.begin(), names.end());
  rows.push_back(header);
  for (std::size_t b = 0; b < tables.front().bins.size(); ++b) {
    std::vector<std::string> row{tables.front().bins[b].label()};
    for (const auto& t : tables) {
      if (t.bins.size() != tables.front().bins.size()) throw Error("format_token_bins: bin layout differs");
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f%%", t.bins[b].percentage);
      row.emplace_back(buf);
    }
    rows.push_back(row);
  }
  std::vector<std::string> total{"Sentences"};
  for (const auto& t : tables) total.push_back(std::to_string(t.total_sentences));
  rows.push_back(total);

  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::ostringstream os;
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) os << " | ";
      os << std::setw(static_cast<int>(width[c])) << (c == 0 ? std::left : std::right) << r[c];
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace csc
