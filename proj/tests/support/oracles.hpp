#pragma once

// Test-only reference computations. Nothing here calls into the library's
// numeric code paths.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "csc/embed.hpp"

namespace csc::testing {

/// Direct-sum Gaussian KDE in long double with Scott's bandwidth computed
/// from scratch (or a given bandwidth).
inline long double brute_force_kde(const std::vector<double>& samples, double x, long double h = -1.0L) {
  const std::size_t m = samples.size();
  if (h <= 0.0L) {
    long double mean = 0.0L;
    for (double s : samples) mean += s;
    mean /= m;
    long double var = 0.0L;
    for (double s : samples) var += (s - mean) * (s - mean);
    var /= (m - 1);
    h = std::sqrt(var) * std::pow(static_cast<long double>(m), -0.2L);
  }
  const long double pi = 3.141592653589793238462643383279502884L;
  long double sum = 0.0L;
  for (double s : samples) {
    long double z = (x - s) / h;
    sum += std::exp(-z * z / 2.0L) / std::sqrt(2.0L * pi);
  }
  return sum / (m * h);
}

/// Overlapping coefficient of N(mu1, sigma^2) and N(mu2, sigma^2):
/// 2 * Phi(-|mu1 - mu2| / (2 sigma)).
inline double analytic_ovl_equal_sigma(double mu1, double mu2, double sigma) {
  const double z = -std::abs(mu1 - mu2) / (2.0 * sigma);
  return std::erfc(-z / std::sqrt(2.0));  // 2 * Phi(z)
}

inline std::vector<double> normal_draws(std::size_t n, double mean, double sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(mean, sd);
  std::vector<double> out(n);
  for (auto& v : out) v = dist(rng);
  return out;
}

/// Position-sensitive toy embedder: every token contributes to a bucket chosen
/// by hashing (token, position), weighted by 1 / (1 + position). Any insertion
/// shifts every later token into a different bucket.
class PositionalHashEmbedder final : public Embedder {
 public:
  explicit PositionalHashEmbedder(std::size_t dim = 256) : dim_(dim) {}
  std::string name() const override { return "positional-hash"; }

  std::vector<std::optional<EmbeddingVector>> embed(std::span<const std::string> texts) override {
    std::vector<std::optional<EmbeddingVector>> out;
    for (const auto& t : texts) {
      std::vector<double> v(dim_, 0.0);
      auto tokens = tokenize(t);
      for (std::size_t p = 0; p < tokens.size(); ++p) {
        std::uint64_t h = 1469598103934665603ULL ^ (p * 0x9E3779B97F4A7C15ULL);
        for (unsigned char c : tokens[p]) h = (h ^ c) * 1099511628211ULL;
        v[h % dim_] += 1.0 / (1.0 + static_cast<double>(p));
      }
      out.emplace_back(EmbeddingVector(std::move(v)));
    }
    return out;
  }

 private:
  std::size_t dim_;
};

/// Fails to embed any text containing `poison`.
class PoisonedEmbedder final : public Embedder {
 public:
  explicit PoisonedEmbedder(std::string poison) : poison_(std::move(poison)) {}
  std::string name() const override { return "poisoned"; }
  std::vector<std::optional<EmbeddingVector>> embed(std::span<const std::string> texts) override {
    std::vector<std::optional<EmbeddingVector>> out;
    for (const auto& t : texts) {
      if (t.find(poison_) != std::string::npos) {
        out.emplace_back();
      } else {
        out.emplace_back(EmbeddingVector({1.0, static_cast<double>(t.size())}));
      }
    }
    return out;
  }

 private:
  std::string poison_;
};

}  // namespace csc::testing
