#pragma once

// End-to-end evaluation: corpus -> fuzz/negate -> embed -> cosine -> curves.
//
// Config file format: one `key = value` per line, '#' starts a comment, blank
// lines are ignored. Keys `corpus`, `language` and `embedder` may repeat. See
// README.md for the list of keys.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "csc/common.hpp"
#include "csc/corpus.hpp"
#include "csc/curves.hpp"
#include "csc/embed.hpp"
#include "csc/perturb.hpp"
#include "csc/remote.hpp"
#include "csc/report.hpp"

namespace csc {

inline constexpr std::string_view kVersion = "1.0.0";

enum class EmbedderKind { Tfidf, WordAverage, Remote };

struct EmbedderSpec {
  EmbedderKind kind = EmbedderKind::Tfidf;
  std::string vectors_path;  // WordAverage
  std::string model;         // Remote

  /// "tfidf", "wordavg:<vector file>" or "remote:<model name>".
  static EmbedderSpec parse(std::string_view s) {
    if (s == "tfidf") return {EmbedderKind::Tfidf, {}, {}};
    auto colon = s.find(':');
    if (colon != std::string_view::npos && colon + 1 < s.size()) {
      auto kind = s.substr(0, colon);
      std::string arg(s.substr(colon + 1));
      if (kind == "wordavg") return {EmbedderKind::WordAverage, arg, {}};
      if (kind == "remote") return {EmbedderKind::Remote, {}, arg};
    }
    throw Error("bad embedder '" + std::string(s) + "' (expected tfidf, wordavg:<file> or remote:<model>)");
  }

  std::string name() const {
    switch (kind) {
      case EmbedderKind::Tfidf: return "tfidf";
      case EmbedderKind::WordAverage: return "wordavg:" + std::filesystem::path(vectors_path).stem().string();
      case EmbedderKind::Remote: return "remote:" + model;
    }
    return {};
  }

  std::string spec_string() const {
    switch (kind) {
      case EmbedderKind::Tfidf: return "tfidf";
      case EmbedderKind::WordAverage: return "wordavg:" + vectors_path;
      case EmbedderKind::Remote: return "remote:" + model;
    }
    return {};
  }
};

struct DatasetSpec {
  std::string name;
  std::filesystem::path path;
  Language language = Language::EN;
};

struct RunConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<EmbedderSpec> embedders;
  std::size_t max_variants = 3;
  std::uint64_t seed = 0;
  std::size_t resolution = 512;
  std::optional<std::size_t> filter_max_tokens;
  bool grammar_negation = false;
  std::string endpoint = "http://127.0.0.1:8080";
  std::filesystem::path out_dir = "csc_out";
  std::size_t jobs = default_jobs();
  std::optional<double> bandwidth;
  std::size_t batch_size = 64;
  int remote_attempts = 3;
  std::size_t remote_backoff_ms = 250;
  double max_skip_rate = 0.10;

  void validate() const {
    if (datasets.empty()) throw Error("config: at least one corpus is required");
    if (embedders.empty()) throw Error("config: at least one embedder is required");
    if (max_variants < 1) throw Error("config: x must be >= 1");
    if (resolution < 16) throw Error("config: resolution must be >= 16");
    if (filter_max_tokens && *filter_max_tokens < 1) throw Error("config: filter_max_tokens must be >= 1");
    if (jobs < 1) throw Error("config: jobs must be >= 1");
    if (batch_size < 1) throw Error("config: batch_size must be >= 1");
    if (remote_attempts < 1) throw Error("config: remote_attempts must be >= 1");
    if (!(max_skip_rate >= 0.0 && max_skip_rate <= 1.0)) throw Error("config: max_skip_rate must be in [0, 1]");
    if (bandwidth && !(*bandwidth > 0.0)) throw Error("config: bandwidth must be > 0");
    std::vector<std::string> names;
    for (const auto& d : datasets) {
      if (std::find(names.begin(), names.end(), d.name) != names.end())
        throw Error("config: duplicate dataset name '" + d.name + "'");
      names.push_back(d.name);
    }
  }
};

// ---------------------------------------------------------------------------
// Config parsing. Values are collected as raw strings first so that command
// line flags can replace file values key by key before typing.

using RawConfig = std::map<std::string, std::vector<std::string>>;

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "corpus",     "language", "embedder",  "x",          "seed",           "resolution",
      "filter_max_tokens",      "grammar_negation",        "endpoint",       "out",
      "jobs",       "bandwidth", "batch_size", "remote_attempts", "remote_backoff_ms", "max_skip_rate"};
  return keys;
}

namespace detail {

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

inline RawConfig parse_config_text(std::string_view text, std::string_view origin = "config") {
  RawConfig raw;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto content = detail::trim(line);
    if (content.empty()) continue;
    auto where = std::string(origin) + ":" + std::to_string(line_no) + ": ";
    auto eq = content.find('=');
    if (eq == std::string::npos) throw Error(where + "expected 'key = value'");
    auto key = detail::trim(std::string_view(content).substr(0, eq));
    auto value = detail::trim(std::string_view(content).substr(eq + 1));
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw Error(where + "unknown key '" + key + "'");
    if (value.empty()) throw Error(where + "empty value for '" + key + "'");
    raw[key].push_back(value);
  }
  return raw;
}

inline RawConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

/// Keys present in `overrides` replace the whole value list from `base`.
inline RawConfig merge_config(RawConfig base, const RawConfig& overrides) {
  for (const auto& [k, v] : overrides)
    if (!v.empty()) base[k] = v;
  return base;
}

namespace detail {

template <typename T>
T parse_unsigned(const std::string& key, const std::string& v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw Error("config: '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

inline double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  if (!parse_double(v, out)) throw Error("config: '" + key + "' expects a number, got '" + v + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error("config: '" + key + "' expects true/false, got '" + v + "'");
}

}  // namespace detail

/// Corpus entries are `path` or `name=path`; the name defaults to the file
/// stem. `language` is given once for all corpora or once per corpus.
inline RunConfig resolve_config(const RawConfig& raw) {
  RunConfig cfg;
  auto single = [&](const std::string& key) -> std::optional<std::string> {
    auto it = raw.find(key);
    if (it == raw.end() || it->second.empty()) return std::nullopt;
    if (it->second.size() > 1) throw Error("config: '" + key + "' given more than once");
    return it->second.front();
  };
  auto list = [&](const std::string& key) {
    auto it = raw.find(key);
    return it == raw.end() ? std::vector<std::string>{} : it->second;
  };

  const auto corpora = list("corpus");
  const auto languages = list("language");
  if (!corpora.empty() && languages.empty()) throw Error("config: 'language' is required");
  if (languages.size() > 1 && languages.size() != corpora.size())
    throw Error("config: give one 'language' for all corpora or one per corpus");
  for (std::size_t i = 0; i < corpora.size(); ++i) {
    DatasetSpec d;
    const auto& entry = corpora[i];
    auto eq = entry.find('=');
    if (eq != std::string::npos) {
      d.name = entry.substr(0, eq);
      d.path = entry.substr(eq + 1);
    } else {
      d.path = entry;
      d.name = d.path.stem().string();
    }
    if (d.name.empty() || d.path.empty()) throw Error("config: bad corpus entry '" + entry + "'");
    d.language = parse_language(languages.size() == 1 ? languages[0] : languages[i]);
    cfg.datasets.push_back(std::move(d));
  }
  for (const auto& e : list("embedder")) cfg.embedders.push_back(EmbedderSpec::parse(e));

  if (auto v = single("x")) cfg.max_variants = detail::parse_unsigned<std::size_t>("x", *v);
  if (auto v = single("seed")) cfg.seed = detail::parse_unsigned<std::uint64_t>("seed", *v);
  if (auto v = single("resolution")) cfg.resolution = detail::parse_unsigned<std::size_t>("resolution", *v);
  if (auto v = single("filter_max_tokens"))
    cfg.filter_max_tokens = detail::parse_unsigned<std::size_t>("filter_max_tokens", *v);
  if (auto v = single("grammar_negation")) cfg.grammar_negation = detail::parse_bool("grammar_negation", *v);
  if (auto v = single("endpoint")) cfg.endpoint = *v;
  if (auto v = single("out")) cfg.out_dir = *v;
  if (auto v = single("jobs")) cfg.jobs = detail::parse_unsigned<std::size_t>("jobs", *v);
  if (auto v = single("bandwidth")) cfg.bandwidth = detail::parse_real("bandwidth", *v);
  if (auto v = single("batch_size")) cfg.batch_size = detail::parse_unsigned<std::size_t>("batch_size", *v);
  if (auto v = single("remote_attempts")) cfg.remote_attempts = detail::parse_unsigned<int>("remote_attempts", *v);
  if (auto v = single("remote_backoff_ms"))
    cfg.remote_backoff_ms = detail::parse_unsigned<std::size_t>("remote_backoff_ms", *v);
  if (auto v = single("max_skip_rate")) cfg.max_skip_rate = detail::parse_real("max_skip_rate", *v);
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Perturbation of a whole corpus

/// Fuzz and negation sets for every sentence, ordered (sentence, fuzz, negate).
inline std::vector<PerturbationSet> perturb_corpus(const Corpus& corpus, std::size_t max_variants,
                                                   std::uint64_t seed, bool grammar_negation = false,
                                                   std::size_t jobs = 1) {
  if (grammar_negation && corpus.language != Language::EN)
    throw Error("grammar-aware negation is English-only");
  const TermTable table = TermTable::for_language(corpus.language);
  std::vector<PerturbationSet> sets(2 * corpus.size());
  parallel_for(corpus.size(), jobs, [&](std::size_t i) {
    const auto& s = corpus.sentences[i];
    sets[2 * i] = fuzz(s, table, max_variants, seed);
    sets[2 * i + 1] = grammar_negation ? grammar_negate_en(s, max_variants, seed)
                                       : negate(s, table, max_variants, seed);
  });
  return sets;
}

inline std::unique_ptr<Embedder> make_embedder(const EmbedderSpec& spec, const RunConfig& cfg) {
  switch (spec.kind) {
    case EmbedderKind::Tfidf: return std::make_unique<TfidfEmbedder>(cfg.jobs);
    case EmbedderKind::WordAverage: {
      auto table = std::make_shared<const WordVectorTable>(load_word_vectors(spec.vectors_path));
      return std::make_unique<WordAverageEmbedder>(std::move(table), spec.name(), cfg.jobs);
    }
    case EmbedderKind::Remote: {
      RemoteOptions o;
      o.endpoint = cfg.endpoint;
      o.model = spec.model;
      o.batch_size = cfg.batch_size;
      o.attempts = cfg.remote_attempts;
      o.initial_backoff = std::chrono::milliseconds(cfg.remote_backoff_ms);
      o.max_in_flight = cfg.jobs;
      return std::make_unique<RemoteEmbedder>(std::move(o));
    }
  }
  throw Error("unknown embedder kind");
}

inline std::string artifact_slug(std::string_view s) {
  std::string out;
  for (char c : s) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                      c == '.';
    out += keep ? c : '_';
  }
  return out;
}

struct PipelineOutcome {
  nlohmann::ordered_json manifest;
  OverlapMatrix matrix;
  std::map<std::pair<std::string, std::string>, CscResult> results;  // (embedder, dataset)
  bool all_ok = true;
};

/// Runs every (embedder, dataset) combination. A failing combination is
/// recorded in the manifest and does not stop the others.
inline PipelineOutcome run_pipeline(const RunConfig& cfg, std::ostream* log = nullptr) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto started = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  auto warn = [&](const std::string& msg, nlohmann::ordered_json& sink) {
    sink.push_back(msg);
    if (log) *log << "warning: " << msg << '\n';
  };

  std::filesystem::create_directories(cfg.out_dir);
  PipelineOutcome outcome;
  nlohmann::ordered_json& m = outcome.manifest;
  m["tool"] = "csc";
  m["version"] = std::string(kVersion);
  {
    nlohmann::ordered_json c;
    c["corpora"] = nlohmann::ordered_json::array();
    for (const auto& d : cfg.datasets)
      c["corpora"].push_back({{"name", d.name}, {"path", d.path.string()}, {"language", to_string(d.language)}});
    c["embedders"] = nlohmann::ordered_json::array();
    for (const auto& e : cfg.embedders) c["embedders"].push_back(e.spec_string());
    c["x"] = cfg.max_variants;
    c["seed"] = cfg.seed;
    c["resolution"] = cfg.resolution;
    c["filter_max_tokens"] = cfg.filter_max_tokens ? nlohmann::ordered_json(*cfg.filter_max_tokens) : nullptr;
    c["grammar_negation"] = cfg.grammar_negation;
    c["bandwidth"] = cfg.bandwidth ? nlohmann::ordered_json(*cfg.bandwidth) : nullptr;
    c["endpoint"] = cfg.endpoint;
    c["batch_size"] = cfg.batch_size;
    c["max_skip_rate"] = cfg.max_skip_rate;
    m["config"] = c;
  }
  m["datasets"] = nlohmann::ordered_json::array();
  m["combinations"] = nlohmann::ordered_json::array();
  m["warnings"] = nlohmann::ordered_json::array();

  for (const auto& ds : cfg.datasets) {
    nlohmann::ordered_json dj;
    dj["name"] = ds.name;
    std::optional<Corpus> corpus;
    std::vector<PerturbationSet> sets;
    std::string dataset_error;
    try {
      corpus = load_corpus(ds.path, ds.language);
      dj["sentences"] = corpus->size();
      if (cfg.filter_max_tokens) corpus = filter_by_length(*corpus, *cfg.filter_max_tokens);
      dj["sentences_used"] = corpus->size();
      if (corpus->empty()) throw Error("no sentences left after loading/filtering");
      sets = perturb_corpus(*corpus, cfg.max_variants, cfg.seed, cfg.grammar_negation, cfg.jobs);
      std::size_t nf = 0, nn = 0;
      std::ofstream tsv(cfg.out_dir / (artifact_slug(ds.name) + ".variants.tsv"), std::ios::binary);
      write_variants_tsv_header(tsv);
      for (const auto& s : sets) {
        (s.mode == Mode::Fuzz ? nf : nn) += s.variants.size();
        write_variants_tsv(tsv, s);
      }
      dj["variants"] = {{"fuzz", nf}, {"negate", nn}};
      dj["variant_bound"] = 2 * cfg.max_variants * corpus->size();
      dj["status"] = "ok";
    } catch (const std::exception& e) {
      dataset_error = e.what();
      dj["status"] = "failed";
      dj["error"] = dataset_error;
      warn("dataset '" + ds.name + "': " + dataset_error, m["warnings"]);
    }
    m["datasets"].push_back(dj);

    for (const auto& es : cfg.embedders) {
      const std::string ename = es.name();
      nlohmann::ordered_json cj;
      cj["embedder"] = ename;
      cj["dataset"] = ds.name;
      try {
        if (!dataset_error.empty()) throw Error("dataset unavailable: " + dataset_error);
        auto embedder = make_embedder(es, cfg);
        SimilarityOptions so;
        so.max_skip_rate = cfg.max_skip_rate;
        auto report = similarity_samples(*corpus, sets, *embedder, so);
        if (report.skipped > 0)
          warn(ename + " x " + ds.name + ": skipped " + std::to_string(report.skipped) + " of " +
                   std::to_string(report.attempted) + " variants that could not be embedded",
               m["warnings"]);
        const auto fv = report.values(Mode::Fuzz);
        const auto nv = report.values(Mode::Negate);
        auto result = build_csc(fv, nv, cfg.resolution, cfg.bandwidth);
        const std::string stem = artifact_slug(ds.name) + "__" + artifact_slug(ename);
        export_csv(result, cfg.out_dir / (stem + ".csv"));
        render_curves(result, ename + " on " + ds.name, cfg.out_dir / (stem + ".svg"));
        cj["status"] = "ok";
        cj["samples"] = {{"fuzz", fv.size()}, {"negate", nv.size()}};
        cj["skipped"] = report.skipped;
        cj["overlap"] = result.overlap;
        cj["artifacts"] = {{"csv", stem + ".csv"}, {"svg", stem + ".svg"}};
        outcome.matrix.set(ename, ds.name, result.overlap);
        outcome.results.emplace(std::make_pair(ename, ds.name), std::move(result));
      } catch (const std::exception& e) {
        outcome.all_ok = false;
        cj["status"] = "failed";
        cj["error"] = e.what();
        outcome.matrix.set(ename, ds.name, std::nullopt);
        warn(ename + " x " + ds.name + ": " + e.what(), m["warnings"]);
      }
      m["combinations"].push_back(cj);
    }
  }
  if (m["datasets"].empty()) outcome.all_ok = false;

  detail::write_file_atomic(cfg.out_dir / "overlap_matrix.csv", outcome.matrix.to_csv());
  detail::write_file_atomic(cfg.out_dir / "overlap_matrix.txt", outcome.matrix.to_text());

  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&started));
  m["status"] = outcome.all_ok ? "ok" : "partial_failure";
  m["started_at"] = stamp;
  m["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail::write_file_atomic(cfg.out_dir / "manifest.json", m.dump(2) + "\n");
  return outcome;
}

}  // namespace csc
