#include <catch2/catch_amalgamated.hpp>

#include <regex>

#include "csc/report.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace csc;
using Catch::Approx;
using csc::testing::TempDir;
using csc::testing::read_file;

namespace {

CscResult gaussian_result(std::size_t resolution = 512) {
  auto a = csc::testing::normal_draws(3000, 0.8, 0.1, 10);
  auto b = csc::testing::normal_draws(3000, 0.4, 0.1, 11);
  return build_csc(a, b, resolution);
}

std::size_t count(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("render_curves writes two paths and the overlap", "[report][svg]") {
  TempDir dir;
  auto r = gaussian_result();
  r.overlap = 0.0221;
  auto out = dir / "fig.svg";
  render_curves(r, "GroNLP on CNL", out);
  auto svg = read_file(out);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(count(svg, "<path ") == 2);
  CHECK(svg.find("overlap = 0.0221") != std::string::npos);
  CHECK(svg.find("Fuzz (n=3000)") != std::string::npos);
  CHECK(svg.find("Negation (n=3000)") != std::string::npos);
  CHECK(svg.find("GroNLP on CNL") != std::string::npos);
}

TEST_CASE("identical curves render as coincident paths", "[report][svg]") {
  auto s = csc::testing::normal_draws(500, 0.5, 0.1, 1);
  auto r = build_csc(s, s, 128);
  auto svg = render_svg(r, "same");
  std::smatch m;
  std::regex d_attr("d=\"([^\"]+)\"");
  std::vector<std::string> paths;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), d_attr); it != std::sregex_iterator(); ++it)
    paths.push_back((*it)[1]);
  REQUIRE(paths.size() == 2);
  CHECK(paths[0] == paths[1]);
  CHECK(svg.find("overlap = 1.0000") != std::string::npos);
}

TEST_CASE("rendering is deterministic and escapes titles", "[report][svg]") {
  auto r = gaussian_result(64);
  CHECK(render_svg(r, "a<b & c") == render_svg(r, "a<b & c"));
  CHECK(render_svg(r, "a<b & c").find("a&lt;b &amp; c") != std::string::npos);
}

TEST_CASE("empty result leaves no file behind", "[report][svg]") {
  TempDir dir;
  CscResult empty;
  auto out = dir / "empty.svg";
  CHECK_THROWS_AS(render_curves(empty, "x", out), Error);
  CHECK_FALSE(std::filesystem::exists(out));
  CHECK_THROWS_AS(export_csv(empty, dir / "empty.csv"), Error);
  CHECK_FALSE(std::filesystem::exists(dir / "empty.csv"));
}

TEST_CASE("unwritable output path", "[report]") {
  auto r = gaussian_result(32);
  CHECK_THROWS_AS(render_curves(r, "x", "/nonexistent-dir/sub/fig.svg"), Error);
  CHECK_THROWS_AS(export_csv(r, "/nonexistent-dir/sub/c.csv"), Error);
}

TEST_CASE("export_csv layout and round trip", "[report][csv]") {
  TempDir dir;
  auto r = gaussian_result(512);
  auto path = dir / "curves.csv";
  export_csv(r, path);
  auto text = read_file(path);
  CHECK(count(text, "\n") == 513);
  CHECK(text.rfind("grid_value,fuzz_density,negation_density\n", 0) == 0);

  auto parsed = read_curves_csv(path);
  REQUIRE(parsed.fuzz.densities.size() == 512);
  CHECK(std::abs(parsed.fuzz.mass() - 1.0) <= 1e-6);
  CHECK(std::abs(parsed.negation.mass() - 1.0) <= 1e-6);
  // overlap recomputed from the parsed columns
  CHECK(std::abs(parsed.overlap - r.overlap) <= 1e-6);
  // 9 significant digits survive a second export unchanged
  CHECK(curves_csv(parsed) == text);
}

TEST_CASE("read_curves_csv rejects malformed files", "[report][csv]") {
  TempDir dir;
  CHECK_THROWS_AS(read_curves_csv(dir.write("a.csv", "x,y\n1,2\n")), Error);
  CHECK_THROWS_AS(read_curves_csv(dir.write("b.csv", "grid_value,fuzz_density,negation_density\n1,2\n")), Error);
  CHECK_THROWS_AS(read_curves_csv(dir.write("c.csv", "grid_value,fuzz_density,negation_density\n1,x,3\n")), Error);
  CHECK_THROWS_AS(read_curves_csv(dir.write("d.csv", "grid_value,fuzz_density,negation_density\n")), Error);
}

TEST_CASE("overlap matrix", "[report][matrix]") {
  SECTION("single cell") {
    OverlapMatrix m;
    m.set("TFIDF", "CNL", 0.2993);
    CHECK(m.rows().size() == 1);
    CHECK(m.columns().size() == 1);
    CHECK(m.to_text().find("0.2993*") != std::string::npos);
    CHECK(m.to_csv() == "embedder,CNL\nTFIDF,0.2993\n");
  }
  SECTION("missing cell") {
    OverlapMatrix m;
    m.set("a", "d1", 0.5);
    m.set("b", "d1", std::nullopt);
    CHECK(m.to_text().find("—") != std::string::npos);
    CHECK(m.to_csv() == "embedder,d1\na,0.5000\nb,\n");
  }
  SECTION("column minimum flagged") {
    OverlapMatrix m;
    m.set("x", "d", 0.3);
    m.set("y", "d", 0.1);
    m.set("z", "d", 0.9);
    CHECK(m.best_in_column(0) == 1u);
    auto text = m.to_text();
    CHECK(text.find("0.1000*") != std::string::npos);
    CHECK(text.find("0.3000*") == std::string::npos);
  }
  SECTION("from results") {
    std::map<std::pair<std::string, std::string>, CscResult> results;
    results[{"tfidf", "demo"}] = gaussian_result(32);
    results[{"other", "demo"}] = gaussian_result(32);
    auto m = overlap_matrix(results);
    CHECK(m.rows().size() == 2);
    CHECK(m.columns().size() == 1);
    CHECK_THROWS_AS(overlap_matrix({}), Error);
  }
}
