#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "csc/common.hpp"
#include "csc/corpus.hpp"
#include "csc/embed.hpp"
#include "csc/perturb.hpp"

namespace csc {

/// Cosine similarity clamped to [-1, 1].
inline double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                ")");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error("degenerate vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) { return cosine(a.values, b.values); }

struct SimilaritySample {
  std::size_t original_id = 0;
  Mode mode = Mode::Fuzz;
  std::size_t variant = 0;  // position within its PerturbationSet
  double value = 0.0;
};

struct SimilarityOptions {
  double max_skip_rate = 0.10;
  std::size_t sentences_per_chunk = 512;
};

struct SimilarityReport {
  std::vector<SimilaritySample> samples;  // sorted by (original_id, mode, variant)
  std::size_t skipped = 0;
  std::size_t attempted = 0;

  std::vector<double> values(Mode mode) const {
    std::vector<double> out;
    for (const auto& s : samples)
      if (s.mode == mode) out.push_back(s.value);
    return out;
  }
};

/// Embeds every original and variant and records one cosine per (original,
/// variant) pair. The embedder is prepared on originals plus all variants.
/// Variants that fail to embed (or embed to a zero vector) are skipped and
/// counted; more than max_skip_rate skipped is an error.
inline SimilarityReport similarity_samples(const Corpus& corpus, std::span<const PerturbationSet> sets,
                                           Embedder& embedder, const SimilarityOptions& opts = {}) {
  std::unordered_map<std::size_t, std::size_t> index_of;
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) index_of.emplace(corpus.sentences[i].id, i);

  // Group sets by original, in corpus order.
  std::vector<std::vector<const PerturbationSet*>> by_sentence(corpus.size());
  for (const auto& set : sets) {
    auto it = index_of.find(set.original_id);
    if (it == index_of.end()) throw Error("perturbation set references unknown sentence " + std::to_string(set.original_id));
    by_sentence[it->second].push_back(&set);
  }

  {
    std::vector<std::string> all;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (by_sentence[i].empty()) continue;
      all.push_back(corpus.sentences[i].text);
      for (const auto* set : by_sentence[i])
        for (const auto& v : set->variants) all.push_back(v.text);
    }
    embedder.prepare(all);
  }

  SimilarityReport report;
  const std::size_t chunk = std::max<std::size_t>(1, opts.sentences_per_chunk);
  for (std::size_t begin = 0; begin < corpus.size(); begin += chunk) {
    const std::size_t end = std::min(corpus.size(), begin + chunk);
    std::vector<std::string> texts;
    for (std::size_t i = begin; i < end; ++i) {
      if (by_sentence[i].empty()) continue;
      texts.push_back(corpus.sentences[i].text);
      for (const auto* set : by_sentence[i])
        for (const auto& v : set->variants) texts.push_back(v.text);
    }
    auto vectors = embedder.embed(texts);
    if (vectors.size() != texts.size()) throw Error("embedder returned a wrong number of vectors");

    std::size_t cursor = 0;
    for (std::size_t i = begin; i < end; ++i) {
      if (by_sentence[i].empty()) continue;
      const auto& original = vectors[cursor++];
      const std::size_t id = corpus.sentences[i].id;
      if (!original || original->norm() == 0.0) {
        throw Error("original sentence " + std::to_string(id) + " could not be embedded by " + embedder.name());
      }
      for (const auto* set : by_sentence[i]) {
        for (std::size_t k = 0; k < set->variants.size(); ++k) {
          const auto& variant = vectors[cursor++];
          ++report.attempted;
          if (!variant || variant->dim() != original->dim() || variant->norm() == 0.0) {
            ++report.skipped;
            continue;
          }
          report.samples.push_back({id, set->mode, k, cosine(*original, *variant)});
        }
      }
    }
  }

  if (report.attempted > 0 &&
      static_cast<double>(report.skipped) > opts.max_skip_rate * static_cast<double>(report.attempted)) {
    throw Error("too many variants could not be embedded (" + std::to_string(report.skipped) + " of " +
                std::to_string(report.attempted) + ")");
  }
  std::stable_sort(report.samples.begin(), report.samples.end(), [](const auto& a, const auto& b) {
    if (a.original_id != b.original_id) return a.original_id < b.original_id;
    if (a.mode != b.mode) return a.mode < b.mode;
    return a.variant < b.variant;
  });
  return report;
}

// ---------------------------------------------------------------------------
// Density curves

/// R equally spaced points from -1 to 1 inclusive.
inline std::vector<double> make_grid(std::size_t resolution) {
  if (resolution < 2) throw Error("grid resolution must be >= 2");
  std::vector<double> grid(resolution);
  const double step = 2.0 / static_cast<double>(resolution - 1);
  for (std::size_t k = 0; k < resolution; ++k) grid[k] = -1.0 + step * static_cast<double>(k);
  grid.back() = 1.0;
  return grid;
}

struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> densities;
  Mode mode = Mode::Fuzz;

  double mass() const {
    double s = 0.0;
    for (double d : densities) s += d;
    return s;
  }
};

/// Scott's rule: sample standard deviation (n - 1 denominator) times m^(-1/5).
inline double scott_bandwidth(std::span<const double> samples) {
  const std::size_t m = samples.size();
  if (m < 2) throw Error("degenerate sample set");
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (*lo == *hi) throw Error("degenerate sample set");
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / static_cast<double>(m - 1));
  if (!(sd > 0.0)) throw Error("degenerate sample set");
  return sd * std::pow(static_cast<double>(m), -0.2);
}

/// Gaussian kernel density estimate evaluated on `grid`.
inline DensityCurve kde(std::span<const double> samples, std::span<const double> grid,
                        std::optional<double> bandwidth_override = std::nullopt, Mode mode = Mode::Fuzz) {
  double h = 0.0;
  if (bandwidth_override) {
    h = *bandwidth_override;
    if (!(h > 0.0) || !std::isfinite(h)) throw Error("bandwidth must be positive and finite");
    if (samples.empty()) throw Error("degenerate sample set");
  } else {
    h = scott_bandwidth(samples);
  }
  const double inv_h = 1.0 / h;
  const double scale = inv_h / (static_cast<double>(samples.size()) * std::sqrt(2.0 * std::numbers::pi));
  DensityCurve curve;
  curve.mode = mode;
  curve.grid.assign(grid.begin(), grid.end());
  curve.densities.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (double s : samples) {
      const double z = (grid[g] - s) * inv_h;
      acc += std::exp(-0.5 * z * z);
    }
    curve.densities[g] = acc * scale;
  }
  return curve;
}

/// Divides each density by the sum over all grid points, giving unit mass.
inline DensityCurve normalize(const DensityCurve& curve) {
  const double total = curve.mass();
  if (!(total > 0.0) || !std::isfinite(total)) throw Error("cannot normalize a curve with zero mass");
  DensityCurve out = curve;
  for (double& d : out.densities) d /= total;
  return out;
}

/// Sum over the grid of the pointwise minimum. 0 means fully separated, 1 means
/// identical.
inline double overlap(const DensityCurve& fuz, const DensityCurve& neg) {
  if (fuz.grid != neg.grid || fuz.densities.size() != neg.densities.size() ||
      fuz.densities.size() != fuz.grid.size()) {
    throw Error("grid mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < fuz.densities.size(); ++i) s += std::min(fuz.densities[i], neg.densities[i]);
  return std::clamp(s, 0.0, 1.0);
}

struct CscResult {
  DensityCurve fuzz;      // normalized
  DensityCurve negation;  // normalized
  double overlap = 0.0;
  std::size_t fuzz_samples = 0;
  std::size_t negation_samples = 0;
};

inline CscResult build_csc(std::span<const double> fuzz_samples, std::span<const double> negation_samples,
                           std::size_t resolution = 512, std::optional<double> bandwidth_override = std::nullopt) {
  const auto grid = make_grid(resolution);
  CscResult r;
  r.fuzz = normalize(kde(fuzz_samples, grid, bandwidth_override, Mode::Fuzz));
  r.negation = normalize(kde(negation_samples, grid, bandwidth_override, Mode::Negate));
  r.overlap = overlap(r.fuzz, r.negation);
  r.fuzz_samples = fuzz_samples.size();
  r.negation_samples = negation_samples.size();
  return r;
}

}  // namespace csc
