#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "csc/common.hpp"
#include "csc/curves.hpp"

namespace csc {

namespace detail {

inline std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Writes via a sibling temporary file and a rename, so a failed write never
/// leaves a partial file at `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error("write failed for '" + path.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot write '" + path.string() + "'");
  }
}

inline void check_renderable(const CscResult& r) {
  if (r.fuzz.densities.empty() || r.negation.densities.empty()) throw Error("empty result");
  if (r.fuzz.grid != r.negation.grid || r.fuzz.grid.size() != r.fuzz.densities.size() ||
      r.negation.grid.size() != r.negation.densities.size()) {
    throw Error("grid mismatch");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// SVG

inline std::string render_svg(const CscResult& result, std::string_view title) {
  detail::check_renderable(result);
  constexpr double W = 720, H = 440, left = 70, right = 20, top = 50, bottom = 80;
  const double pw = W - left - right, ph = H - top - bottom;
  double ymax = 0.0;
  for (double d : result.fuzz.densities) ymax = std::max(ymax, d);
  for (double d : result.negation.densities) ymax = std::max(ymax, d);
  if (!(ymax > 0.0)) ymax = 1.0;
  ymax *= 1.05;
  auto px = [&](double x) { return left + (x + 1.0) / 2.0 * pw; };
  auto py = [&](double y) { return top + ph - y / ymax * ph; };
  auto path = [&](const DensityCurve& c) {
    std::string d;
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      d += i == 0 ? "M" : " L";
      d += detail::fmt("%.6f", px(c.grid[i]));
      d += ',';
      d += detail::fmt("%.6f", py(c.densities[i]));
    }
    return d;
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
     << W << ' ' << H << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
     << detail::xml_escape(title) << "</text>\n";
  // axes
  os << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
     << "\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\"/>\n";
  os << "</g>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">\n";
  for (double t : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    os << "<text x=\"" << detail::fmt("%.6f", px(t)) << "\" y=\"" << top + ph + 16 << "\">"
       << detail::fmt("%.1f", t) << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << top + ph + 34 << "\">cosine similarity</text>\n";
  os << "</g>\n";
  os << "<text x=\"18\" y=\"" << top + ph / 2 << "\" font-family=\"sans-serif\" font-size=\"11\" "
     << "text-anchor=\"middle\" transform=\"rotate(-90 18 " << top + ph / 2 << ")\">normalized density</text>\n";

  os << "<path class=\"fuzz\" d=\"" << path(result.fuzz) << "\" fill=\"none\" stroke=\"#1f77b4\" "
     << "stroke-width=\"1.5\"/>\n";
  os << "<path class=\"negation\" d=\"" << path(result.negation) << "\" fill=\"none\" stroke=\"#d62728\" "
     << "stroke-width=\"1.5\"/>\n";

  // legend
  const double lx = left + 12, ly = top + 14;
  os << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 24 << "\" y2=\"" << ly
     << "\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
  os << "<text x=\"" << lx + 30 << "\" y=\"" << ly + 4 << "\">Fuzz (n=" << result.fuzz_samples << ")</text>\n";
  os << "<line x1=\"" << lx << "\" y1=\"" << ly + 18 << "\" x2=\"" << lx + 24 << "\" y2=\"" << ly + 18
     << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
  os << "<text x=\"" << lx + 30 << "\" y=\"" << ly + 22 << "\">Negation (n=" << result.negation_samples
     << ")</text>\n";
  os << "</g>\n";
  os << "<text class=\"overlap\" x=\"" << W / 2 << "\" y=\"" << H - 14
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">overlap = "
     << detail::fmt("%.4f", result.overlap) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

inline void render_curves(const CscResult& result, std::string_view title, const std::filesystem::path& out) {
  detail::write_file_atomic(out, render_svg(result, title));
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::string_view kCurveCsvHeader = "grid_value,fuzz_density,negation_density";

inline std::string curves_csv(const CscResult& result) {
  detail::check_renderable(result);
  std::string out(kCurveCsvHeader);
  out += '\n';
  for (std::size_t i = 0; i < result.fuzz.grid.size(); ++i) {
    out += detail::fmt("%.9g", result.fuzz.grid[i]);
    out += ',';
    out += detail::fmt("%.9g", result.fuzz.densities[i]);
    out += ',';
    out += detail::fmt("%.9g", result.negation.densities[i]);
    out += '\n';
  }
  return out;
}

inline void export_csv(const CscResult& result, const std::filesystem::path& out) {
  detail::write_file_atomic(out, curves_csv(result));
}

/// Parses a curve CSV back into a result. Overlap is recomputed from the
/// parsed densities; sample counts are not stored and come back as 0.
inline CscResult read_curves_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || (line != kCurveCsvHeader && line != std::string(kCurveCsvHeader) + "\r")) {
    throw Error(path.string() + ": not a curve CSV (bad header)");
  }
  CscResult r;
  r.fuzz.mode = Mode::Fuzz;
  r.negation.mode = Mode::Negate;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    double v[3];
    std::size_t start = 0;
    for (int k = 0; k < 3; ++k) {
      auto comma = line.find(',', start);
      if ((k < 2) == (comma == std::string::npos)) throw Error(detail::at_line(path, line_no) + "expected 3 columns");
      auto field = std::string_view(line).substr(start, k < 2 ? comma - start : std::string::npos);
      if (!detail::parse_double(field, v[k])) throw Error(detail::at_line(path, line_no) + "non-numeric field");
      start = comma + 1;
    }
    r.fuzz.grid.push_back(v[0]);
    r.negation.grid.push_back(v[0]);
    r.fuzz.densities.push_back(v[1]);
    r.negation.densities.push_back(v[2]);
  }
  if (r.fuzz.grid.empty()) throw Error(path.string() + ": no data rows");
  r.overlap = overlap(r.fuzz, r.negation);
  return r;
}

// ---------------------------------------------------------------------------
// Overlap matrix: embedders as rows, datasets as columns.

class OverlapMatrix {
 public:
  void set(const std::string& embedder, const std::string& dataset, std::optional<double> value) {
    cells_[{row_index(embedder), column_index(dataset)}] = value;
  }

  const std::vector<std::string>& rows() const { return rows_; }
  const std::vector<std::string>& columns() const { return columns_; }

  std::optional<double> at(std::size_t row, std::size_t col) const {
    auto it = cells_.find({row, col});
    return it == cells_.end() ? std::nullopt : it->second;
  }

  /// Row holding the lowest overlap (best separation) in a column.
  std::optional<std::size_t> best_in_column(std::size_t col) const {
    std::optional<std::size_t> best;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      auto v = at(r, col);
      if (v && (!best || *v < *at(*best, col))) best = r;
    }
    return best;
  }

  std::string to_csv() const {
    std::string out = "embedder";
    for (const auto& c : columns_) out += "," + c;
    out += '\n';
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      out += rows_[r];
      for (std::size_t c = 0; c < columns_.size(); ++c) {
        out += ',';
        if (auto v = at(r, c)) out += detail::fmt("%.4f", *v);
      }
      out += '\n';
    }
    return out;
  }

  /// Aligned plain-text table. Missing cells print as an em dash and the
  /// lowest value per column carries a trailing '*'.
  std::string to_text() const {
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header{""};
    header.insert(header.end(), columns_.begin(), columns_.end());
    grid.push_back(header);
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      std::vector<std::string> row{rows_[r]};
      for (std::size_t c = 0; c < columns_.size(); ++c) {
        auto v = at(r, c);
        if (!v) {
          row.emplace_back("—");
          continue;
        }
        std::string cell = detail::fmt("%.4f", *v);
        if (best_in_column(c) == r) cell += '*';
        row.push_back(cell);
      }
      grid.push_back(row);
    }
    auto display_width = [](const std::string& s) {
      std::size_t w = 0;
      for (unsigned char ch : s) w += (ch & 0xC0) != 0x80;
      return w;
    };
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& row : grid)
      for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], display_width(row[c]));
    std::string out;
    for (const auto& row : grid) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out += "  ";
        const std::string pad(width[c] - display_width(row[c]), ' ');
        out += c == 0 ? row[c] + pad : pad + row[c];
      }
      while (!out.empty() && out.back() == ' ') out.pop_back();
      out += '\n';
    }
    return out;
  }

 private:
  std::size_t row_index(const std::string& name) {
    auto it = std::find(rows_.begin(), rows_.end(), name);
    if (it != rows_.end()) return static_cast<std::size_t>(it - rows_.begin());
    rows_.push_back(name);
    return rows_.size() - 1;
  }
  std::size_t column_index(const std::string& name) {
    auto it = std::find(columns_.begin(), columns_.end(), name);
    if (it != columns_.end()) return static_cast<std::size_t>(it - columns_.begin());
    columns_.push_back(name);
    return columns_.size() - 1;
  }

  std::vector<std::string> rows_;
  std::vector<std::string> columns_;
  std::map<std::pair<std::size_t, std::size_t>, std::optional<double>> cells_;
};

inline OverlapMatrix overlap_matrix(const std::map<std::pair<std::string, std::string>, CscResult>& results) {
  if (results.empty()) throw Error("overlap_matrix: no results");
  OverlapMatrix m;
  for (const auto& [key, result] : results) m.set(key.first, key.second, result.overlap);
  return m;
}

}  // namespace csc
