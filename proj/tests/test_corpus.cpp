#include <catch2/catch_amalgamated.hpp>

#include <numeric>
#include <random>

#include "csc/corpus.hpp"
#include "support/temp_dir.hpp"

using namespace csc;
using csc::testing::TempDir;

TEST_CASE("tokenize splits on whitespace runs", "[corpus]") {
  CHECK(tokenize("bevelen geven") == std::vector<std::string>{"bevelen", "geven"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("  make   decisions ") == std::vector<std::string>{"make", "decisions"});
  CHECK(tokenize("a\tb\r\nc") == std::vector<std::string>{"a", "b", "c"});
  // punctuation stays attached
  CHECK(tokenize("Hello, world.") == std::vector<std::string>{"Hello,", "world."});
}

TEST_CASE("tokenize is idempotent on joined tokens", "[corpus][property]") {
  std::mt19937 rng(7);
  const std::string alphabet = "ab c\t  d,e\n";
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    std::uniform_int_distribution<int> len(0, 40), pick(0, static_cast<int>(alphabet.size()) - 1);
    for (int i = len(rng); i > 0; --i) s += alphabet[pick(rng)];
    auto tokens = tokenize(s);
    CHECK(tokenize(join(tokens)) == tokens);
    for (const auto& t : tokens) CHECK_FALSE(t.empty());
  }
}

TEST_CASE("load_corpus reads one sentence per line", "[corpus]") {
  TempDir dir;
  SECTION("single sentence") {
    auto c = load_corpus(dir.write("a.txt", "bevelen geven\n"), Language::NL);
    REQUIRE(c.size() == 1);
    CHECK(c.sentences[0].tokens.size() == 2);
    CHECK(c.sentences[0].id == 0);
    CHECK(c.sentences[0].language == Language::NL);
  }
  SECTION("empty file") {
    CHECK(load_corpus(dir.write("e.txt", ""), Language::EN).size() == 0);
  }
  SECTION("blank lines are skipped and ids stay dense") {
    auto c = load_corpus(dir.write("b.txt", "first line\n   \nsecond line"), Language::EN);
    REQUIRE(c.size() == 2);
    CHECK(c.sentences[1].id == 1);
    CHECK(c.sentences[1].text == "second line");
  }
  SECTION("CRLF endings") {
    auto c = load_corpus(dir.write("c.txt", "one two\r\nthree\r\n"), Language::EN);
    REQUIRE(c.size() == 2);
    CHECK(c.sentences[0].text == "one two");
    CHECK(c.sentences[1].tokens == std::vector<std::string>{"three"});
  }
  SECTION("UTF-8 content") {
    auto c = load_corpus(dir.write("u.txt", "café über naïve\n"), Language::NL);
    CHECK(c.sentences[0].tokens.size() == 3);
  }
}

TEST_CASE("load_corpus errors", "[corpus]") {
  TempDir dir;
  CHECK_THROWS_AS(load_corpus(dir / "missing.txt", Language::EN), Error);
  auto bad = dir.write("bad.txt", "fine\nbroken \xC3\x28 here\n");
  try {
    load_corpus(bad, Language::EN);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
}

namespace {
Corpus corpus_with_lengths(const std::vector<std::size_t>& lengths) {
  std::vector<std::string> lines;
  for (auto n : lengths) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " w" : "w");
    lines.push_back(s);
  }
  return Corpus::from_lines(lines, Language::EN);
}
}  // namespace

TEST_CASE("filter_by_length keeps strictly shorter sentences", "[corpus]") {
  auto c = corpus_with_lengths({2, 15});
  auto f = filter_by_length(c, 10);
  REQUIRE(f.size() == 1);
  CHECK(f.sentences[0].tokens.size() == 2);

  CHECK(filter_by_length(c, 1).empty());

  auto same = filter_by_length(c, 100);
  REQUIRE(same.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(same.sentences[i].id == c.sentences[i].id);

  // ids of survivors are those of the source
  auto c2 = corpus_with_lengths({12, 3, 40, 9});
  auto f2 = filter_by_length(c2, 10);
  REQUIRE(f2.size() == 2);
  CHECK(f2.sentences[0].id == 1);
  CHECK(f2.sentences[1].id == 3);

  // exactly max_tokens is excluded
  CHECK(filter_by_length(corpus_with_lengths({10}), 10).empty());
  CHECK_THROWS_AS(filter_by_length(c, 0), Error);
}

TEST_CASE("filter_by_length is a subset bounded by k", "[corpus][property]") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<std::size_t> len(1, 70), k(1, 60);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::size_t> lengths(25);
    for (auto& l : lengths) l = len(rng);
    auto c = corpus_with_lengths(lengths);
    auto limit = k(rng);
    auto f = filter_by_length(c, limit);
    std::size_t expected = std::count_if(lengths.begin(), lengths.end(), [&](auto l) { return l < limit; });
    CHECK(f.size() == expected);
    for (const auto& s : f.sentences) {
      CHECK(s.tokens.size() < limit);
      CHECK(c.sentences[s.id].text == s.text);
    }
  }
}

TEST_CASE("token_bin_stats", "[corpus]") {
  SECTION("two bins half each") {
    auto t = token_bin_stats(corpus_with_lengths({5, 15}));
    REQUIRE(t.bins.size() == 6);
    CHECK(t.bins[0].percentage == 50.0);
    CHECK(t.bins[1].percentage == 50.0);
    CHECK(t.bins[0].label() == "0-10");
    CHECK(t.bins[5].label() == ">=50");
    CHECK(t.total_sentences == 2);
  }
  SECTION("all short") {
    auto t = token_bin_stats(corpus_with_lengths({1, 3, 9}));
    CHECK(t.bins[0].percentage == 100.0);
    auto text = format_token_bins({"demo"}, {t});
    CHECK(text.find("100.00%") != std::string::npos);
    CHECK(text.find("Sentences") != std::string::npos);
  }
  SECTION("open bin") {
    auto t = token_bin_stats(corpus_with_lengths({55}));
    CHECK(t.bins.back().percentage == 100.0);
    CHECK_FALSE(t.bins.back().upper.has_value());
  }
  SECTION("boundaries belong to the upper bin") {
    auto t = token_bin_stats(corpus_with_lengths({10, 20, 50}));
    CHECK(t.bins[0].count == 0);
    CHECK(t.bins[1].count == 1);
    CHECK(t.bins[2].count == 1);
    CHECK(t.bins[5].count == 1);
  }
  SECTION("empty corpus") {
    CHECK_THROWS_WITH(token_bin_stats(Corpus{}), "no sentences");
  }
}

TEST_CASE("token bins are exhaustive and sum to 100", "[corpus][property]") {
  std::mt19937 rng(3);
  std::uniform_int_distribution<std::size_t> len(1, 90), count(1, 300), width(1, 15);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::size_t> lengths(count(rng));
    for (auto& l : lengths) l = len(rng);
    auto t = token_bin_stats(corpus_with_lengths(lengths), width(rng));
    double total = 0.0;
    std::size_t members = 0;
    for (const auto& b : t.bins) {
      total += b.percentage;
      members += b.count;
    }
    CHECK(std::abs(total - 100.0) <= 0.01);
    CHECK(members == lengths.size());
  }
}
