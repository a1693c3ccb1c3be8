#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "sphwin/errors.hpp"
#include "sphwin/io.hpp"

using namespace sphwin;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("sphwin_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

HarmonicCoefficients random_alm(int L, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  HarmonicCoefficients a(L);
  for (int l = 0; l <= L; ++l)
    for (int m = 0; m <= l; ++m) a(l, m) = {N(rng), m ? N(rng) : 0.0};
  return a;
}

}  // namespace

TEST_CASE("map roundtrip is exact") {
  std::mt19937_64 rng(1);
  auto g = build_grid(7);
  SphereMap m = synthesize(random_alm(7, rng), g);
  std::stringstream ss;
  io::write_map(ss, m);
  CHECK(ss.str().rfind("# grid lmax=7\n", 0) == 0);
  SphereMap back = io::read_map(ss);
  CHECK(back.grid->lmax() == 7);
  CHECK(back.values == m.values);
}

TEST_CASE("map reader validates rows against the header") {
  auto g = build_grid(3);
  std::stringstream ss;
  io::write_map(ss, SphereMap(g));
  std::string text = ss.str();

  std::istringstream missing(text.substr(0, text.rfind('\n', text.size() - 2) + 1));
  CHECK_THROWS_AS(io::read_map(missing), PreconditionError);

  std::string wrong = text;
  wrong.replace(wrong.find("lmax=3"), 6, "lmax=4");
  std::istringstream bad_header(wrong);
  CHECK_THROWS_AS(io::read_map(bad_header), PreconditionError);

  std::istringstream no_header("0, 0, 1, 0, 1\n");
  CHECK_THROWS_AS(io::read_map(no_header), PreconditionError);

  std::istringstream garbage("# grid lmax=0\n0, 0, x, 0, 1\n");
  CHECK_THROWS_AS(io::read_map(garbage), PreconditionError);
}

TEST_CASE("multipole roundtrip and validation") {
  std::mt19937_64 rng(2);
  auto a = random_alm(9, rng);
  std::stringstream ss;
  io::write_alm(ss, a);
  CHECK(ss.str().rfind("# lmax=9 real=1\n", 0) == 0);
  auto b = io::read_alm(ss);
  CHECK(max_abs_difference(a, b) == 0.0);

  std::istringstream out_of_range("# lmax=2 real=1\n3, 0, 1, 0\n");
  CHECK_THROWS_AS(io::read_alm(out_of_range), PreconditionError);
  std::istringstream complex_m0("# lmax=2 real=1\n1, 0, 1, 0.5\n");
  CHECK_THROWS_AS(io::read_alm(complex_m0), PreconditionError);
  std::istringstream columns("# lmax=2 real=1\n1, 0, 1\n");
  CHECK_THROWS_AS(io::read_alm(columns), PreconditionError);
}

TEST_CASE("window roundtrip") {
  SpectralWindow w(3, 6, {0.1, 1.0 / 3.0, -2.5e-17, 7.0}, "slepian");
  std::stringstream ss;
  io::write_window(ss, w);
  CHECK(ss.str().rfind("# lmin=3 lmax=6 kind=slepian\n", 0) == 0);
  auto b = io::read_window(ss);
  CHECK(b.lmin() == 3);
  CHECK(b.lmax() == 6);
  CHECK(b.kind() == "slepian");
  CHECK(b.coeffs() == w.coeffs());

  std::istringstream outside("# lmin=3 lmax=4 kind=x\n5, 1\n");
  CHECK_THROWS_AS(io::read_window(outside), PreconditionError);
  std::istringstream band("# lmin=5 lmax=4 kind=x\n");
  CHECK_THROWS_AS(io::read_window(band), PreconditionError);
}

TEST_CASE("spectrum file") {
  std::istringstream in("l, C\n0, 1\n1, 0.5\n3, 0.25\n");
  auto c = io::read_spectrum(in);
  CHECK(c.lmax() == 3);
  CHECK(c.at(2) == 0.0);
  CHECK(c.at(3) == 0.25);
  std::stringstream ss;
  io::write_spectrum(ss, c);
  CHECK(io::read_spectrum(ss).values() == c.values());
  std::istringstream neg("0, -1\n");
  CHECK_THROWS_AS(io::read_spectrum(neg), PreconditionError);
  std::istringstream empty("");
  CHECK_THROWS_AS(io::read_spectrum(empty), PreconditionError);
}

TEST_CASE("band matrix dump") {
  linalg::Matrix m(2, 2);
  m << 1.0, 0.1, 0.1, 1.0 / 7.0;
  std::stringstream ss;
  io::write_band_matrix(ss, 5, m);
  int lmin = 0;
  auto back = io::read_band_matrix(ss, lmin);
  CHECK(lmin == 5);
  CHECK(back == m);
}

TEST_CASE("criterion report layout") {
  std::ostringstream os;
  io::write_criteria(os, {{"w", "lp", 1.0, std::numeric_limits<double>::infinity(), 0.5}});
  CHECK(os.str() == "window_id, criterion, theta0_deg, p, value\nw, lp, 1, inf, 0.5\n");
}

TEST_CASE("family manifest resolves relative paths") {
  fs::path dir = scratch("family");
  WindowFamily f;
  f.scales = {{0, SpectralWindow(1, 2, {1.0, 0.5})}, {1, SpectralWindow(2, 4, {0.5, 1.0, 0.2})}};
  f.lmin = 1;
  f.lmax = 4;
  std::vector<fs::path> files;
  for (const auto& s : f.scales) {
    fs::path p = dir / ("w" + std::to_string(s.label) + ".csv");
    std::ostringstream os;
    io::write_window(os, s.window);
    io::write_text(p, os.str());
    files.push_back(p);
  }
  io::write_family(dir / "family.json", f, files);
  CHECK(io::read_text(dir / "family.json").find("\"w0.csv\"") != std::string::npos);
  auto back = io::read_family(dir / "family.json");
  REQUIRE(back.scales.size() == 2);
  CHECK(back.lmin == 1);
  CHECK(back.lmax == 4);
  CHECK(back.find(1)->window.coeffs() == f.scales[1].window.coeffs());

  io::write_text(dir / "empty.json", "{\"scales\": []}");
  CHECK_THROWS_AS(io::read_family(dir / "empty.json"), DomainError);
  io::write_text(dir / "broken.json", "{\"scales\": [");
  CHECK_THROWS_AS(io::read_family(dir / "broken.json"), PreconditionError);
  CHECK_THROWS_AS(io::read_family(dir / "absent.json"), PreconditionError);
}

TEST_CASE("mask specs") {
  fs::path dir = scratch("mask");
  io::write_text(dir / "cap.json", R"({"axisym": [[0, 20, 0]], "apod_deg": 5, "lmax": 24})");
  auto w = io::read_mask(dir / "cap.json", 8);
  CHECK(w.axisymmetric());
  CHECK(w.lmax() == 24);
  auto ref = WeightFunction::axisymmetric({{0.0, 20.0, 0.0}}, 5.0, 24);
  CHECK(max_abs_difference(w.multipoles(), ref.multipoles()) == 0.0);

  io::write_text(dir / "nolmax.json", R"({"axisym": [[0, 20, 0]]})");
  CHECK(io::read_mask(dir / "nolmax.json", 8).lmax() == 8);

  auto ref10 = WeightFunction::axisymmetric({{0.0, 20.0, 0.0}}, 5.0, 10);
  auto g = build_grid(10);
  std::ostringstream os;
  io::write_map(os, ref10.sample(g));
  io::write_text(dir / "mask_map.csv", os.str());
  io::write_text(dir / "map.json", R"({"map": "mask_map.csv", "lmax": 10})");
  auto fm = io::read_mask(dir / "map.json", 0);
  CHECK_FALSE(fm.axisymmetric());
  CHECK(max_abs_difference(fm.multipoles(), ref10.multipoles()) < 1e-13);

  io::write_text(dir / "coarse.json", R"({"map": "mask_map.csv", "lmax": 11})");
  CHECK_THROWS_AS(io::read_mask(dir / "coarse.json", 0), PreconditionError);
  io::write_text(dir / "neither.json", R"({"apod_deg": 2})");
  CHECK_THROWS_AS(io::read_mask(dir / "neither.json", 4), PreconditionError);
  io::write_text(dir / "pair.json", R"({"axisym": [[0, 20]]})");
  CHECK_THROWS_AS(io::read_mask(dir / "pair.json", 4), PreconditionError);
}
