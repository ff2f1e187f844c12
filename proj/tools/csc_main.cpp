// csc: command line front end.
//
//   csc stats    --corpus FILE --language EN|NL [--bin-width 10]
//   csc perturb  --corpus FILE --language EN|NL --mode fuzz|negate [--x 3] [--seed 0]
//   csc evaluate [--config FILE] --corpus FILE --language EN --embedder tfidf --out DIR
//   csc report   --dir DIR [--out DIR]

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "csc/csc.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_stats(const std::vector<std::string>& corpora, const std::vector<std::string>& languages,
              std::size_t bin_width, std::optional<std::size_t> max_tokens) {
  if (languages.size() != 1 && languages.size() != corpora.size())
    throw csc::Error("give one --language for all corpora or one per corpus");
  std::vector<std::string> names;
  std::vector<csc::TokenBinTable> tables;
  for (std::size_t i = 0; i < corpora.size(); ++i) {
    auto lang = csc::parse_language(languages.size() == 1 ? languages[0] : languages[i]);
    auto corpus = csc::load_corpus(corpora[i], lang);
    if (max_tokens) corpus = csc::filter_by_length(corpus, *max_tokens);
    names.push_back(fs::path(corpora[i]).stem().string());
    tables.push_back(csc::token_bin_stats(corpus, bin_width));
  }
  std::cout << csc::format_token_bins(names, tables);
  return 0;
}

int cmd_perturb(const std::string& corpus_path, const std::string& language, const std::string& mode_name,
                std::size_t x, std::uint64_t seed, bool grammar, std::optional<std::size_t> max_tokens,
                const std::string& out_path) {
  auto corpus = csc::load_corpus(corpus_path, csc::parse_language(language));
  if (max_tokens) corpus = csc::filter_by_length(corpus, *max_tokens);
  const auto mode = csc::parse_mode(mode_name);
  if (grammar && mode != csc::Mode::Negate) throw csc::Error("--grammar-negation applies to --mode negate");
  const auto table = csc::TermTable::for_language(corpus.language);

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) throw csc::Error("cannot write '" + out_path + "'");
  }
  std::ostream& os = out_path.empty() ? std::cout : file;
  csc::write_variants_tsv_header(os);
  for (const auto& s : corpus.sentences) {
    if (grammar)
      csc::write_variants_tsv(os, csc::grammar_negate_en(s, x, seed));
    else
      csc::write_variants_tsv(os, csc::perturb(s, table, mode, x, seed));
  }
  return 0;
}

int cmd_report(const fs::path& dir, fs::path out) {
  if (!fs::is_directory(dir)) throw csc::Error("'" + dir.string() + "' is not a directory");
  if (out.empty()) out = dir;
  fs::create_directories(out);
  std::vector<fs::path> csvs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv" &&
        entry.path().filename() != "overlap_matrix.csv")
      csvs.push_back(entry.path());
  }
  std::sort(csvs.begin(), csvs.end());
  csc::OverlapMatrix matrix;
  std::size_t rendered = 0;
  for (const auto& p : csvs) {
    csc::CscResult r;
    try {
      r = csc::read_curves_csv(p);
    } catch (const csc::Error& e) {
      std::cerr << "warning: skipping " << p.string() << ": " << e.what() << '\n';
      continue;
    }
    const std::string stem = p.stem().string();
    std::string dataset = stem, embedder = stem;
    if (auto sep = stem.find("__"); sep != std::string::npos) {
      dataset = stem.substr(0, sep);
      embedder = stem.substr(sep + 2);
    }
    csc::render_curves(r, embedder + " on " + dataset, out / (stem + ".svg"));
    matrix.set(embedder, dataset, r.overlap);
    ++rendered;
  }
  if (rendered == 0) throw csc::Error("nothing to report");
  csc::detail::write_file_atomic(out / "overlap_matrix.csv", matrix.to_csv());
  csc::detail::write_file_atomic(out / "overlap_matrix.txt", matrix.to_text());
  std::cout << matrix.to_text();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concept Separation Curves: perturbation-based evaluation of sentence embedders"};
  app.set_version_flag("--version", std::string(csc::kVersion));
  app.require_subcommand(1);

  // stats
  auto* stats = app.add_subcommand("stats", "Print the token-count bin table of one or more corpora");
  std::vector<std::string> st_corpora, st_langs;
  std::size_t st_width = 10;
  std::optional<std::size_t> st_max;
  stats->add_option("--corpus", st_corpora, "Corpus file, one sentence per line")->required();
  stats->add_option("--language", st_langs, "EN or NL (once, or once per corpus)")->required();
  stats->add_option("--bin-width", st_width, "Tokens per bin")->check(CLI::PositiveNumber);
  stats->add_option("--filter-max-tokens", st_max, "Keep sentences with fewer tokens than this");

  // perturb
  auto* pert = app.add_subcommand("perturb", "Dump fuzz or negation variants as TSV");
  std::string pt_corpus, pt_lang, pt_mode = "fuzz", pt_out;
  std::size_t pt_x = 3;
  std::uint64_t pt_seed = 0;
  bool pt_grammar = false;
  std::optional<std::size_t> pt_max;
  pert->add_option("--corpus", pt_corpus, "Corpus file")->required();
  pert->add_option("--language", pt_lang, "EN or NL")->required();
  pert->add_option("--mode", pt_mode, "fuzz or negate")->check(CLI::IsMember({"fuzz", "negate"}));
  pert->add_option("--x", pt_x, "Maximum variants per sentence")->check(CLI::PositiveNumber);
  pert->add_option("--seed", pt_seed, "Global seed");
  pert->add_flag("--grammar-negation", pt_grammar, "Place 'not' after auxiliaries (EN, negate only)");
  pert->add_option("--filter-max-tokens", pt_max, "Keep sentences with fewer tokens than this");
  pert->add_option("--out", pt_out, "Output TSV (default: stdout)");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Run the full pipeline and write curves, CSVs and a manifest");
  std::string ev_config;
  std::vector<std::string> ev_corpora, ev_langs, ev_embedders;
  std::string ev_x, ev_seed, ev_res, ev_max, ev_endpoint, ev_out, ev_jobs, ev_bw, ev_batch;
  bool ev_grammar = false;
  eval->add_option("--config", ev_config, "Config file (key = value); flags override it");
  eval->add_option("--corpus", ev_corpora, "Corpus file or name=file (repeatable)");
  eval->add_option("--language", ev_langs, "EN or NL (once, or once per corpus)");
  eval->add_option("--embedder", ev_embedders, "tfidf | wordavg:<file> | remote:<model> (repeatable)");
  eval->add_option("--x", ev_x, "Maximum variants per sentence and mode (default 3)");
  eval->add_option("--seed", ev_seed, "Global seed (default 0)");
  eval->add_option("--resolution", ev_res, "Grid points over [-1, 1] (default 512)");
  eval->add_option("--filter-max-tokens", ev_max, "Keep sentences with fewer tokens than this");
  eval->add_flag("--grammar-negation", ev_grammar, "Grammar-aware English negation");
  eval->add_option("--endpoint", ev_endpoint, "Embedding service base URL for remote embedders");
  eval->add_option("--out", ev_out, "Output directory (default csc_out)");
  eval->add_option("--jobs", ev_jobs, "Worker threads (default: hardware concurrency)");
  eval->add_option("--bandwidth", ev_bw, "Fixed KDE bandwidth instead of Scott's rule");
  eval->add_option("--batch-size", ev_batch, "Remote embedding batch size (default 64)");

  // report
  auto* rep = app.add_subcommand("report", "Re-render figures and the overlap matrix from stored CSVs");
  std::string rp_dir, rp_out;
  rep->add_option("--dir", rp_dir, "Directory with curve CSVs")->required();
  rep->add_option("--out", rp_out, "Output directory (default: --dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0) {
      CLI::App* failing = &app;
      for (auto* sub : app.get_subcommands()) failing = sub;
      std::cerr << '\n' << failing->help();
    }
    return code;
  }

  try {
    if (*stats) return cmd_stats(st_corpora, st_langs, st_width, st_max);
    if (*pert) return cmd_perturb(pt_corpus, pt_lang, pt_mode, pt_x, pt_seed, pt_grammar, pt_max, pt_out);
    if (*rep) return cmd_report(rp_dir, rp_out);
    if (*eval) {
      csc::RawConfig raw;
      if (!ev_config.empty()) raw = csc::load_config_file(ev_config);
      csc::RawConfig flags;
      flags["corpus"] = ev_corpora;
      flags["language"] = ev_langs;
      flags["embedder"] = ev_embedders;
      auto put = [&](const char* key, const std::string& v) {
        if (!v.empty()) flags[key] = {v};
      };
      put("x", ev_x);
      put("seed", ev_seed);
      put("resolution", ev_res);
      put("filter_max_tokens", ev_max);
      if (ev_grammar) flags["grammar_negation"] = {"true"};
      put("endpoint", ev_endpoint);
      put("out", ev_out);
      put("jobs", ev_jobs);
      put("bandwidth", ev_bw);
      put("batch_size", ev_batch);
      const auto cfg = csc::resolve_config(csc::merge_config(raw, flags));
      auto outcome = csc::run_pipeline(cfg, &std::cerr);
      std::cout << outcome.matrix.to_text();
      std::cout << "manifest: " << (cfg.out_dir / "manifest.json").string() << '\n';
      return outcome.all_ok ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
