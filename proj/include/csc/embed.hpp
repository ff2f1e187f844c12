#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "csc/common.hpp"
#include "csc/corpus.hpp"

namespace csc {

/// Fixed-dimension real vector produced by an embedder.
struct EmbeddingVector {
  std::vector<double> values;

  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> v) : values(std::move(v)) {
    for (double x : values)
      if (!std::isfinite(x)) throw Error("embedding contains a non-finite component");
  }

  std::size_t dim() const { return values.size(); }
  double norm() const {
    double s = 0.0;
    for (double x : values) s += x * x;
    return std::sqrt(s);
  }
};

/// A black box that turns texts into vectors.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string name() const = 0;

  /// Called once per dataset with every text the run will embed, before any
  /// call to embed(). Backends that need fitting do it here.
  virtual void prepare(std::span<const std::string> /*texts*/) {}

  /// One entry per input, in input order. An empty optional marks a text the
  /// backend could not embed; transport-level failures throw instead.
  virtual std::vector<std::optional<EmbeddingVector>> embed(std::span<const std::string> texts) = 0;
};

// ---------------------------------------------------------------------------
// TF-IDF

/// Smoothed idf: ln((1 + N) / (1 + df)) + 1. No stopword removal; tokens are
/// whitespace-split and lowercased.
struct TfidfModel {
  std::unordered_map<std::string, std::size_t> vocabulary;
  std::vector<double> idf;
  std::vector<std::size_t> df;
  std::size_t corpus_doc_count = 0;

  std::size_t dim() const { return idf.size(); }

  std::optional<std::size_t> column(const std::string& token) const {
    auto it = vocabulary.find(token);
    if (it == vocabulary.end()) return std::nullopt;
    return it->second;
  }
};

inline TfidfModel fit_tfidf(std::span<const std::string> sentences) {
  std::map<std::string, std::size_t> df;  // ordered: columns follow lexicographic order
  std::size_t docs = 0;
  for (const auto& s : sentences) {
    auto tokens = tokenize(s);
    if (tokens.empty()) continue;
    ++docs;
    for (auto& t : tokens) t = detail::ascii_lower(t);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (auto& t : tokens) ++df[t];
  }
  if (docs == 0) throw Error("fit_tfidf: empty input set");
  TfidfModel model;
  model.corpus_doc_count = docs;
  model.idf.reserve(df.size());
  model.df.reserve(df.size());
  const double n = static_cast<double>(docs);
  for (const auto& [token, count] : df) {
    model.vocabulary.emplace(token, model.idf.size());
    model.df.push_back(count);
    model.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return model;
}

/// Raw counts times idf, L2-normalized. Text with no known token maps to the
/// zero vector.
inline EmbeddingVector embed_tfidf(const TfidfModel& model, std::string_view text) {
  std::vector<double> v(model.dim(), 0.0);
  for (const auto& tok : tokenize(text)) {
    if (auto col = model.column(detail::ascii_lower(tok))) v[*col] += 1.0;
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] *= model.idf[i];
    sq += v[i] * v[i];
  }
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (double& x : v) x *= inv;
  }
  return EmbeddingVector(std::move(v));
}

class TfidfEmbedder final : public Embedder {
 public:
  explicit TfidfEmbedder(std::size_t jobs = 1) : jobs_(jobs) {}

  std::string name() const override { return "tfidf"; }

  void prepare(std::span<const std::string> texts) override { model_ = fit_tfidf(texts); }

  std::vector<std::optional<EmbeddingVector>> embed(std::span<const std::string> texts) override {
    if (!model_) throw Error("tfidf embedder used before prepare()");
    std::vector<std::optional<EmbeddingVector>> out(texts.size());
    parallel_for(texts.size(), jobs_, [&](std::size_t i) { out[i] = embed_tfidf(*model_, texts[i]); });
    return out;
  }

  const TfidfModel& model() const { return *model_; }

 private:
  std::size_t jobs_;
  std::optional<TfidfModel> model_;
};

// ---------------------------------------------------------------------------
// Word vectors

struct WordVectorTable {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> entries;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::string at_line(const std::filesystem::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no) + ": ";
}

inline bool parse_double(std::string_view s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

/// Reads the textual "count dim" header format used by static word-vector
/// releases. Duplicate tokens: the last row wins and a warning is recorded.
inline WordVectorTable load_word_vectors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read word-vector file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(detail::at_line(path, 1) + "missing 'count dim' header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = tokenize(line);
  std::size_t declared = 0;
  WordVectorTable table;
  auto parse_size = [](const std::string& s, std::size_t& v) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size();
  };
  if (header.size() != 2 || !parse_size(header[0], declared) || !parse_size(header[1], table.dim) ||
      table.dim == 0) {
    throw Error(detail::at_line(path, 1) + "malformed header, expected 'count dim'");
  }
  std::size_t line_no = 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = tokenize(line);
    if (fields.empty()) continue;
    if (fields.size() != table.dim + 1) {
      throw Error(detail::at_line(path, line_no) + "expected " + std::to_string(table.dim) +
                  " components, found " + std::to_string(fields.size() - 1));
    }
    std::vector<double> v(table.dim);
    for (std::size_t k = 0; k < table.dim; ++k) {
      if (!detail::parse_double(fields[k + 1], v[k])) {
        throw Error(detail::at_line(path, line_no) + "non-numeric component '" + fields[k + 1] + "'");
      }
    }
    ++rows;
    auto [it, inserted] = table.entries.insert_or_assign(fields[0], std::move(v));
    if (!inserted) {
      table.warnings.push_back(detail::at_line(path, line_no) + "duplicate token '" + fields[0] +
                               "', last occurrence wins");
    }
  }
  if (rows != declared) {
    throw Error(path.string() + ": header declares " + std::to_string(declared) + " rows, found " +
                std::to_string(rows));
  }
  return table;
}

/// Mean of the L2-normalized vectors of in-vocabulary tokens.
inline EmbeddingVector embed_average(const WordVectorTable& table, std::string_view text) {
  std::vector<double> sum(table.dim, 0.0);
  std::size_t used = 0;
  for (const auto& tok : tokenize(text)) {
    auto it = table.entries.find(tok);
    if (it == table.entries.end()) continue;
    double sq = 0.0;
    for (double x : it->second) sq += x * x;
    if (sq == 0.0) continue;
    const double inv = 1.0 / std::sqrt(sq);
    for (std::size_t k = 0; k < table.dim; ++k) sum[k] += it->second[k] * inv;
    ++used;
  }
  if (used == 0) throw Error("no embeddable tokens");
  for (double& x : sum) x /= static_cast<double>(used);
  return EmbeddingVector(std::move(sum));
}

class WordAverageEmbedder final : public Embedder {
 public:
  WordAverageEmbedder(std::shared_ptr<const WordVectorTable> table, std::string name, std::size_t jobs = 1)
      : table_(std::move(table)), name_(std::move(name)), jobs_(jobs) {}

  std::string name() const override { return name_; }

  std::vector<std::optional<EmbeddingVector>> embed(std::span<const std::string> texts) override {
    std::vector<std::optional<EmbeddingVector>> out(texts.size());
    parallel_for(texts.size(), jobs_, [&](std::size_t i) {
      try {
        out[i] = embed_average(*table_, texts[i]);
      } catch (const Error&) {
        out[i].reset();
      }
    });
    return out;
  }

 private:
  std::shared_ptr<const WordVectorTable> table_;
  std::string name_;
  std::size_t jobs_;
};

}  // namespace csc
