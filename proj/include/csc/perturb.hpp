#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "csc/common.hpp"
#include "csc/corpus.hpp"

namespace csc {

/// Insertion terms per language. Fuzz terms are articles, negation terms are
/// negation particles.
struct TermTable {
  Language language = Language::EN;
  std::vector<std::string> fuzz_terms;
  std::vector<std::string> negation_terms;

  static TermTable for_language(Language lang) {
    if (lang == Language::NL) return {lang, {"de", "het"}, {"niet"}};
    return {lang, {"a", "the"}, {"not"}};
  }

  const std::vector<std::string>& terms(Mode mode) const {
    return mode == Mode::Fuzz ? fuzz_terms : negation_terms;
  }
};

struct PerturbedSentence {
  std::string text;
  std::string inserted_term;
  std::size_t slot = 0;  // index of the original token the term precedes

  friend bool operator==(const PerturbedSentence&, const PerturbedSentence&) = default;
};

struct PerturbationSet {
  std::size_t original_id = 0;
  Mode mode = Mode::Fuzz;
  std::vector<PerturbedSentence> variants;
};

/// Slots are "in front of word k" for every k; never after the last word.
inline std::vector<std::size_t> insertion_slots(const std::vector<std::string>& tokens) {
  std::vector<std::size_t> slots(tokens.size());
  for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i;
  return slots;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Unbiased draw from [0, bound] by masked rejection. Only relies on the
// engine's raw output, which the standard pins down for mt19937_64.
inline std::uint64_t uniform_upto(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) return 0;
  std::uint64_t mask = bound;
  mask |= mask >> 1;
  mask |= mask >> 2;
  mask |= mask >> 4;
  mask |= mask >> 8;
  mask |= mask >> 16;
  mask |= mask >> 32;
  for (;;) {
    std::uint64_t v = rng() & mask;
    if (v <= bound) return v;
  }
}

}  // namespace detail

/// In-place Fisher-Yates shuffle, reproducible across platforms for a seed.
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = detail::uniform_upto(rng, i - 1);
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

/// Seed for the stream of one (sentence, mode) pair. Independent of the order
/// in which sentences are processed.
inline std::uint64_t stream_seed(std::uint64_t global_seed, std::size_t sentence_id, Mode mode) {
  std::uint64_t h = detail::splitmix64(global_seed);
  h = detail::splitmix64(h ^ static_cast<std::uint64_t>(sentence_id));
  return detail::splitmix64(h ^ (mode == Mode::Fuzz ? 0x66757A7AULL : 0x6E656761ULL));
}

inline PerturbedSentence realize(const std::vector<std::string>& tokens, const std::string& term,
                                 std::size_t slot) {
  std::string text;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i == slot) {
      text += term;
      text += ' ';
    }
    text += tokens[i];
    if (i + 1 < tokens.size()) text += ' ';
  }
  return {std::move(text), term, slot};
}

/// Builds the term x slot candidate list (term-major, slot-ascending), shuffles
/// it with `seed` and realizes the first min(max_variants, |pool|) entries.
inline std::vector<PerturbedSentence> generate_from_slots(const std::vector<std::string>& tokens,
                                                          const std::vector<std::string>& terms,
                                                          const std::vector<std::size_t>& slots,
                                                          std::size_t max_variants,
                                                          std::uint64_t seed) {
  if (terms.empty()) throw Error("no insertion terms");
  if (slots.empty()) throw Error("no insertion slots");
  if (max_variants < 1) throw Error("max_variants must be >= 1");
  struct Candidate {
    std::size_t term;
    std::size_t slot;
  };
  std::vector<Candidate> pool;
  pool.reserve(terms.size() * slots.size());
  for (std::size_t t = 0; t < terms.size(); ++t)
    for (std::size_t s : slots) pool.push_back({t, s});
  seeded_shuffle(pool, seed);
  const std::size_t take = std::min(max_variants, pool.size());
  std::vector<PerturbedSentence> out;
  out.reserve(take);
  for (std::size_t k = 0; k < take; ++k) out.push_back(realize(tokens, terms[pool[k].term], pool[k].slot));
  return out;
}

inline std::vector<PerturbedSentence> generate_variants(const Sentence& sentence,
                                                        const std::vector<std::string>& terms,
                                                        std::size_t max_variants, std::uint64_t seed) {
  return generate_from_slots(sentence.tokens, terms, insertion_slots(sentence.tokens), max_variants, seed);
}

inline PerturbationSet perturb(const Sentence& sentence, const TermTable& table, Mode mode,
                               std::size_t max_variants, std::uint64_t global_seed) {
  return {sentence.id, mode,
          generate_variants(sentence, table.terms(mode), max_variants,
                            stream_seed(global_seed, sentence.id, mode))};
}

inline PerturbationSet fuzz(const Sentence& sentence, const TermTable& table, std::size_t max_variants,
                            std::uint64_t global_seed) {
  return perturb(sentence, table, Mode::Fuzz, max_variants, global_seed);
}

inline PerturbationSet negate(const Sentence& sentence, const TermTable& table, std::size_t max_variants,
                              std::uint64_t global_seed) {
  return perturb(sentence, table, Mode::Negate, max_variants, global_seed);
}

inline bool is_english_auxiliary(std::string_view token) {
  static constexpr std::array<std::string_view, 21> kAux{
      "is",     "are",  "was", "were",  "am", "be",   "can", "could", "will", "would", "shall",
      "should", "must", "may", "might", "do", "does", "did", "has",   "have", "had"};
  const std::string lower = detail::ascii_lower(token);
  for (auto aux : kAux)
    if (lower == aux) return true;
  return false;
}

/// English-only negation that places "not" right after an auxiliary verb when
/// the sentence has one, and falls back to plain negate() otherwise.
inline PerturbationSet grammar_negate_en(const Sentence& sentence, std::size_t max_variants,
                                         std::uint64_t global_seed) {
  if (sentence.language != Language::EN) throw Error("grammar-aware negation is English-only");
  const TermTable table = TermTable::for_language(Language::EN);
  std::vector<std::size_t> slots;
  for (std::size_t k = 0; k + 1 < sentence.tokens.size(); ++k) {
    if (is_english_auxiliary(sentence.tokens[k])) slots.push_back(k + 1);
  }
  if (slots.empty()) return negate(sentence, table, max_variants, global_seed);
  return {sentence.id, Mode::Negate,
          generate_from_slots(sentence.tokens, table.negation_terms, slots, max_variants,
                              stream_seed(global_seed, sentence.id, Mode::Negate))};
}

inline void write_variants_tsv_header(std::ostream& os) {
  os << "original_id\tmode\tinserted_term\tslot\ttext\n";
}

inline void write_variants_tsv(std::ostream& os, const PerturbationSet& set) {
  for (const auto& v : set.variants) {
    os << set.original_id << '\t' << to_string(set.mode) << '\t' << v.inserted_term << '\t' << v.slot << '\t'
       << v.text << '\n';
  }
}

}  // namespace csc
