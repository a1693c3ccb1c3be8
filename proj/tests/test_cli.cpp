#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "sphwin/io.hpp"

using namespace sphwin;
namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("sphwin_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Result run(const fs::path& dir, const std::string& args) {
  std::string cmd = "cd '" + dir.string() + "' && '" SPHWIN_CLI_PATH "' " + args + " > stdout.txt 2> stderr.txt";
  int raw = std::system(cmd.c_str());
  Result r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = io::read_text(dir / "stdout.txt");
  r.err = io::read_text(dir / "stderr.txt");
  return r;
}

std::vector<std::string> lines(const fs::path& p) {
  std::istringstream in(io::read_text(p));
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& row) {
  std::vector<std::string> out;
  std::istringstream in(row);
  for (std::string c; std::getline(in, c, ',');) {
    auto b = c.find_first_not_of(' ');
    out.push_back(b == std::string::npos ? "" : c.substr(b));
  }
  return out;
}

int count_prefix(const fs::path& dir, const std::string& prefix) {
  int n = 0;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename().string().rfind(prefix, 0) == 0) ++n;
  return n;
}

void write_inputs(const fs::path& dir) {
  std::ostringstream c;
  for (int l = 0; l <= 20; ++l) c << l << ", " << 1.0 / ((l + 1.0) * (l + 2.0)) << "\n";
  io::write_text(dir / "cl.csv", c.str());
  io::write_text(dir / "cut.json", R"({"axisym": [[70, 110, 0]], "apod_deg": 10})");
  io::write_text(dir / "full.json", R"({"axisym": [], "lmax": 0})");
}

}  // namespace

TEST_CASE("help, version and usage errors") {
  auto dir = scratch("usage");
  CHECK(run(dir, "--help").status == 0);
  auto v = run(dir, "--version");
  CHECK(v.status == 0);
  CHECK(v.out.find('.') != std::string::npos);
  CHECK(run(dir, "").status == 2);
  CHECK(run(dir, "design spline --B 1.7").status == 2);
  CHECK(run(dir, "design spline --B 1.7 --jmax 3 --ramp linear").status == 2);
  CHECK(run(dir, "frobnicate").status == 2);
  CHECK(run(dir, "design spline --B 0.5 --jmax 3 --out o").status == 2);
}

TEST_CASE("unreadable inputs are precondition errors") {
  auto dir = scratch("precondition");
  auto r = run(dir, "simulate --spectrum missing.csv --n 1 --out o");
  CHECK(r.status == 3);
  CHECK(r.err.find("missing.csv") != std::string::npos);
  io::write_text(dir / "bad.csv", "0, one\n");
  CHECK(run(dir, "simulate --spectrum bad.csv --n 1 --out o").status == 3);
}

TEST_CASE("overflowing spectra are numeric errors") {
  auto dir = scratch("numeric");
  write_inputs(dir);
  std::ostringstream c;
  for (int l = 0; l <= 20; ++l) c << l << ", 1e308\n";
  io::write_text(dir / "huge.csv", c.str());
  CHECK(run(dir, "design mise --band 5 15 --mask cut.json --spectrum huge.csv --out o").status == 4);
}

TEST_CASE("spline design writes one file per scale") {
  auto dir = scratch("spline");
  auto r = run(dir, "design spline --B 1.7 --order 7 --jmax 10 --out fam");
  REQUIRE(r.status == 0);
  CHECK(count_prefix(dir / "fam", "window_j") == 11);
  auto family = io::read_family(dir / "fam" / "family.json");
  CHECK(family.scales.size() == 11);
  auto manifest = nlohmann::json::parse(io::read_text(dir / "fam" / "manifest.json"));
  CHECK(manifest.at("command") == "design spline");
  CHECK(manifest.at("config").at("B") == 1.7);
  CHECK(manifest.at("outputs").size() >= 13);
  CHECK(lines(dir / "fam" / "criteria.csv").front() == "window_id, criterion, theta0_deg, p, value");
}

TEST_CASE("config file supplies defaults that flags override") {
  auto dir = scratch("config");
  io::write_text(dir / "cfg.json", R"({"B": 2.0, "jmax": 3, "order": 5})");
  REQUIRE(run(dir, "design spline --config cfg.json --out a").status == 0);
  CHECK(count_prefix(dir / "a", "window_j") == 4);
  REQUIRE(run(dir, "design spline --config cfg.json --jmax 2 --out b").status == 0);
  CHECK(count_prefix(dir / "b", "window_j") == 3);
  auto manifest = nlohmann::json::parse(io::read_text(dir / "b" / "manifest.json"));
  CHECK(manifest.at("config").at("order") == 5);
}

TEST_CASE("slepian design is deterministic") {
  auto dir = scratch("slepian");
  REQUIRE(run(dir, "design slepian --band 5 15 --theta0 30 --out a").status == 0);
  REQUIRE(run(dir, "design slepian --band 5 15 --theta0 30 --out b").status == 0);
  CHECK(count_prefix(dir / "a", "window_") == 1);
  CHECK(io::read_text(dir / "a" / "window_slepian.csv") == io::read_text(dir / "b" / "window_slepian.csv"));
  std::ifstream in(dir / "a" / "window_slepian.csv");
  auto w = io::read_window(in);
  CHECK(w.lmin() == 5);
  CHECK(w.lmax() == 15);
  double norm = 0.0;
  for (int l = 5; l <= 15; ++l) norm += (2.0 * l + 1.0) / (8.0 * M_PI * M_PI) * w.at(l) * w.at(l);
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("simulate: seeds, counts and formats") {
  auto dir = scratch("simulate");
  write_inputs(dir);
  REQUIRE(run(dir, "simulate --spectrum cl.csv --n 3 --seed 11 --out a").status == 0);
  REQUIRE(run(dir, "simulate --spectrum cl.csv --n 3 --seed 11 --out b").status == 0);
  REQUIRE(run(dir, "simulate --spectrum cl.csv --n 3 --seed 12 --out c").status == 0);
  CHECK(count_prefix(dir / "a", "realization_") == 3);
  for (const char* f : {"realization_0000.csv", "realization_0002.csv"}) {
    CHECK(io::read_text(dir / "a" / f) == io::read_text(dir / "b" / f));
    CHECK(io::read_text(dir / "a" / f) != io::read_text(dir / "c" / f));
  }
  CHECK(io::read_text(dir / "a" / "realization_0000.csv") != io::read_text(dir / "a" / "realization_0001.csv"));

  REQUIRE(run(dir, "simulate --spectrum cl.csv --n 0 --out none").status == 0);
  CHECK(count_prefix(dir / "none", "realization_") == 0);
  CHECK(run(dir, "simulate --spectrum cl.csv --n -1 --out neg").status == 2);

  REQUIRE(run(dir, "simulate --spectrum cl.csv --n 1 --seed 11 --format map --out m").status == 0);
  std::ifstream mi(dir / "m" / "realization_0000.csv");
  auto map = io::read_map(mi);
  std::ifstream ai(dir / "a" / "realization_0000.csv");
  auto alm = io::read_alm(ai);
  CHECK(max_abs_difference(analyze(map, alm.lmax()), alm) < 1e-12);
}

TEST_CASE("analyze then synthesize reproduces the field") {
  auto dir = scratch("roundtrip");
  write_inputs(dir);
  REQUIRE(run(dir, "design spline --B 2 --order 5 --jmax 4 --out fam").status == 0);
  REQUIRE(run(dir, "simulate --spectrum cl.csv --n 1 --seed 3 --out sim").status == 0);
  REQUIRE(run(dir, "simulate --spectrum cl.csv --n 1 --seed 3 --format map --out simmap").status == 0);
  for (const char* grid : {"shared", "per-scale"}) {
    CAPTURE(grid);
    REQUIRE(run(dir, std::string("analyze --alm sim/realization_0000.csv --family fam/family.json --grid ") + grid +
                         " --out beta")
                .status == 0);
    auto r = run(dir, "synthesize --coeffs beta/coefficients.json --family fam/family.json "
                      "--reference sim/realization_0000.csv --out rec");
    REQUIRE(r.status == 0);
    auto pos = r.out.find("max_abs_error ");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(r.out.substr(pos + 14)) < 1e-8);
  }
  REQUIRE(run(dir, "analyze --map simmap/realization_0000.csv --family fam/family.json --out betamap").status == 0);
  auto r = run(dir, "synthesize --coeffs betamap/coefficients.json --family fam/family.json "
                    "--reference sim/realization_0000.csv --out recmap");
  REQUIRE(r.status == 0);
  CHECK(std::stod(r.out.substr(r.out.find("max_abs_error ") + 14)) < 1e-8);

  io::write_text(dir / "empty.json", R"({"lmin": 1, "lmax": 4, "scales": []})");
  CHECK(run(dir, "analyze --alm sim/realization_0000.csv --family empty.json --out e").status == 2);
  CHECK(run(dir, "analyze --family fam/family.json --out e").status == 2);
}

TEST_CASE("single-scale coefficients match the library") {
  auto dir = scratch("single");
  write_inputs(dir);
  REQUIRE(run(dir, "design reference --kind sqrt-spline --j 2 --B 2 --order 3 --out w").status == 0);
  std::ifstream wi(dir / "w" / "window_sqrt-spline.csv");
  auto w = io::read_window(wi);
  WindowFamily f;
  f.scales = {{0, w}};
  f.lmin = w.lmin();
  f.lmax = w.lmax();
  io::write_family(dir / "one.json", f, {dir / "w" / "window_sqrt-spline.csv"});
  REQUIRE(run(dir, "simulate --spectrum cl.csv --n 1 --seed 5 --out sim").status == 0);
  REQUIRE(run(dir, "analyze --alm sim/realization_0000.csv --family one.json --out beta").status == 0);
  std::ifstream ai(dir / "sim" / "realization_0000.csv");
  auto expected = needlet_analyze_family(io::read_alm(ai), f, GridPolicy::Shared);
  std::ifstream bi(dir / "beta" / "beta_j00.csv");
  auto beta = io::read_map(bi);
  REQUIRE(beta.values.size() == expected.front().values.size());
  CHECK(beta.values == expected.front().values);
}

TEST_CASE("evaluate reports") {
  auto dir = scratch("evaluate");
  write_inputs(dir);
  std::string windows;
  for (int t : {10, 20, 30, 45, 60}) {
    std::string out = "s" + std::to_string(t);
    REQUIRE(run(dir, "design slepian --band 5 15 --theta0 " + std::to_string(t) + " --out " + out).status == 0);
    fs::rename(dir / out / "window_slepian.csv", dir / ("slepian" + std::to_string(t) + ".csv"));
    windows += " --window slepian" + std::to_string(t) + ".csv";
  }
  REQUIRE(run(dir, "design mise --band 5 15 --mask cut.json --spectrum cl.csv --out m").status == 0);
  windows += " --window m/window_mise.csv";

  SUBCASE("mise realizations") {
    REQUIRE(run(dir, "evaluate --criterion mise --mask cut.json --spectrum cl.csv --n-mc 30" + windows +
                         " --out e")
                .status == 0);
    auto rows = lines(dir / "e" / "mise.csv");
    CHECK(rows.size() == 181);
    CHECK(rows.front() == "window_id, realization, value");
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(split(rows[i])[2]) >= 0.0);
  }
  SUBCASE("full-sky mask error is one") {
    REQUIRE(run(dir, "evaluate --criterion mask-error --mask full.json --spectrum cl.csv --n-mc 4"
                     " --alpha-grid 0 2 0.5 --window slepian30.csv --out e")
                .status == 0);
    auto rows = lines(dir / "e" / "mask-error.csv");
    REQUIRE(rows.size() == 6);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(split(rows[i])[2]) == doctest::Approx(1.0));
  }
  SUBCASE("uncertainty and concentration") {
    REQUIRE(run(dir, "evaluate --criterion heisenberg" + windows + " --out h").status == 0);
    auto rows = lines(dir / "h" / "heisenberg.csv");
    REQUIRE(rows.size() == 7);
    for (std::size_t i = 1; i <= 5; ++i) CHECK(std::stod(split(rows[i])[4]) >= 1.0);
    REQUIRE(run(dir, "evaluate --criterion lp --p 1 2 inf --theta0 10 30 --window slepian30.csv --out c").status == 0);
    rows = lines(dir / "c" / "lp.csv");
    REQUIRE(rows.size() == 7);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      double v = std::stod(split(rows[i])[4]);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  SUBCASE("missing problem inputs") {
    CHECK(run(dir, "evaluate --criterion mise --window slepian30.csv --out e").status == 2);
  }
}
