#include "sphwin/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "sphwin/errors.hpp"

namespace sphwin::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& what) {
  throw PreconditionError(name + ":" + std::to_string(line) + ": " + what);
}

// key=value pairs of a `# ...` header line
std::map<std::string, std::string> header_fields(const std::string& line) {
  std::map<std::string, std::string> out;
  std::istringstream ss(line.substr(1));
  std::string tok;
  while (ss >> tok) {
    auto eq = tok.find('=');
    if (eq != std::string::npos) out[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return out;
}

int header_int(const std::map<std::string, std::string>& h, const std::string& key,
               const std::string& name) {
  auto it = h.find(key);
  if (it == h.end()) fail(name, 1, "header lacks " + key);
  char* end = nullptr;
  long v = std::strtol(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0') fail(name, 1, "bad " + key + " in header");
  return static_cast<int>(v);
}

std::vector<double> parse_row(const std::string& line, std::size_t expected, const std::string& name,
                              int lineno) {
  std::vector<double> v;
  const char* p = line.c_str();
  while (*p) {
    while (*p == ' ' || *p == '\t') ++p;
    char* end = nullptr;
    double x = std::strtod(p, &end);
    if (end == p) fail(name, lineno, "expected a number");
    v.push_back(x);
    p = end;
    while (*p == ' ' || *p == '\t' || *p == '\r') ++p;
    if (*p == ',') ++p;
    else if (*p) fail(name, lineno, "unexpected character");
  }
  if (v.size() != expected)
    fail(name, lineno, "expected " + std::to_string(expected) + " columns, found " + std::to_string(v.size()));
  return v;
}

bool is_blank(const std::string& s) { return s.find_first_not_of(" \t\r") == std::string::npos; }

// Reads the first line, which must be a `#` header, then every data row.
struct Table {
  std::map<std::string, std::string> header;
  std::vector<std::pair<int, std::vector<double>>> rows;  // line number, values
};

Table read_table(std::istream& is, std::size_t columns, const std::string& name, bool needs_header) {
  Table t;
  std::string line;
  int lineno = 0;
  bool first = true;
  while (std::getline(is, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    if (line[0] == '#') {
      if (first) t.header = header_fields(line);
      first = false;
      continue;
    }
    if (first && needs_header) fail(name, lineno, "missing header line");
    first = false;
    // tolerate a column-name row such as `l, C`
    if (t.rows.empty() && (std::isalpha(static_cast<unsigned char>(line[line.find_first_not_of(" \t")]))))
      continue;
    t.rows.emplace_back(lineno, parse_row(line, columns, name, lineno));
  }
  return t;
}

int as_index(double v, const std::string& name, int lineno) {
  if (v != std::floor(v) || std::abs(v) > 1e9) fail(name, lineno, "index is not an integer");
  return static_cast<int>(v);
}

}  // namespace

void write_map(std::ostream& os, const SphereMap& map) {
  if (!map.grid) throw PreconditionError("map has no grid");
  os << "# grid lmax=" << map.grid->lmax() << "\n";
  const auto& rings = map.grid->rings();
  for (std::size_t i = 0; i < rings.size(); ++i)
    for (int j = 0; j < rings[i].n_phi; ++j)
      os << i << ", " << j << ", " << num(rings[i].theta) << ", " << num(map.grid->phi(rings[i], j))
         << ", " << num(map.values[rings[i].offset + j]) << "\n";
}

SphereMap read_map(std::istream& is, const std::string& name) {
  Table t = read_table(is, 5, name, true);
  int lmax = header_int(t.header, "lmax", name);
  if (lmax < 0) fail(name, 1, "negative lmax");
  GridPtr g = build_grid(lmax);
  if (t.rows.size() != g->size())
    fail(name, 1, "header lmax=" + std::to_string(lmax) + " needs " + std::to_string(g->size()) +
                      " rows, found " + std::to_string(t.rows.size()));
  SphereMap m(g);
  std::vector<bool> seen(g->size(), false);
  const auto& rings = g->rings();
  for (const auto& [ln, r] : t.rows) {
    int i = as_index(r[0], name, ln), j = as_index(r[1], name, ln);
    if (i < 0 || i >= static_cast<int>(rings.size()) || j < 0 || j >= rings[i].n_phi)
      fail(name, ln, "point index outside the grid");
    if (std::abs(r[2] - rings[i].theta) > 1e-12 || std::abs(r[3] - g->phi(rings[i], j)) > 1e-12)
      fail(name, ln, "coordinates do not match the grid");
    std::size_t k = rings[i].offset + j;
    if (seen[k]) fail(name, ln, "duplicate point");
    seen[k] = true;
    m.values[k] = r[4];
  }
  return m;
}

void write_alm(std::ostream& os, const HarmonicCoefficients& alm) {
  os << "# lmax=" << alm.lmax() << " real=" << (alm.real_field() ? 1 : 0) << "\n";
  for (int l = 0; l <= alm.lmax(); ++l)
    for (int m = 0; m <= l; ++m)
      os << l << ", " << m << ", " << num(alm(l, m).real()) << ", " << num(alm(l, m).imag()) << "\n";
}

HarmonicCoefficients read_alm(std::istream& is, const std::string& name) {
  Table t = read_table(is, 4, name, true);
  int lmax = header_int(t.header, "lmax", name);
  int real = t.header.count("real") ? header_int(t.header, "real", name) : 1;
  if (lmax < 0) fail(name, 1, "negative lmax");
  HarmonicCoefficients a(lmax, real != 0);
  for (const auto& [ln, r] : t.rows) {
    int l = as_index(r[0], name, ln), m = as_index(r[1], name, ln);
    if (l < 0 || l > lmax || m < 0 || m > l) fail(name, ln, "(l, m) outside 0 <= m <= l <= lmax");
    if (real && m == 0 && r[3] != 0.0) fail(name, ln, "m = 0 coefficient of a real field must be real");
    a(l, m) = {r[2], r[3]};
  }
  return a;
}

void write_window(std::ostream& os, const SpectralWindow& w) {
  os << "# lmin=" << w.lmin() << " lmax=" << w.lmax() << " kind=" << (w.kind().empty() ? "custom" : w.kind())
     << "\n";
  for (int l = w.lmin(); l <= w.lmax(); ++l) os << l << ", " << num(w.at(l)) << "\n";
}

SpectralWindow read_window(std::istream& is, const std::string& name) {
  Table t = read_table(is, 2, name, true);
  int lmin = header_int(t.header, "lmin", name), lmax = header_int(t.header, "lmax", name);
  if (lmin < 0 || lmax < lmin) fail(name, 1, "header band must satisfy 0 <= lmin <= lmax");
  std::vector<double> c(lmax - lmin + 1, 0.0);
  for (const auto& [ln, r] : t.rows) {
    int l = as_index(r[0], name, ln);
    if (l < lmin || l > lmax) fail(name, ln, "multipole outside the header band");
    c[l - lmin] = r[1];
  }
  std::string kind = t.header.count("kind") ? t.header.at("kind") : "";
  try {
    return SpectralWindow(lmin, lmax, std::move(c), kind);
  } catch (const DomainError& e) {
    fail(name, 1, e.what());
  }
}

void write_spectrum(std::ostream& os, const PowerSpectrum& c) {
  os << "# l, C\n";
  for (int l = 0; l <= c.lmax(); ++l) os << l << ", " << num(c.at(l)) << "\n";
}

PowerSpectrum read_spectrum(std::istream& is, const std::string& name) {
  Table t = read_table(is, 2, name, false);
  std::vector<double> c;
  for (const auto& [ln, r] : t.rows) {
    int l = as_index(r[0], name, ln);
    if (l < 0) fail(name, ln, "negative multipole");
    if (!(r[1] >= 0.0) || !std::isfinite(r[1])) fail(name, ln, "C_l must be finite and >= 0");
    if (static_cast<int>(c.size()) <= l) c.resize(l + 1, 0.0);
    c[l] = r[1];
  }
  if (c.empty()) fail(name, 1, "no rows");
  return PowerSpectrum(std::move(c));
}

void write_band_matrix(std::ostream& os, int lmin, const linalg::Matrix& m) {
  os << "# lmin=" << lmin << " lmax=" << lmin + m.rows() - 1 << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      os << lmin + i << ", " << lmin + j << ", " << num(m(i, j)) << "\n";
}

linalg::Matrix read_band_matrix(std::istream& is, int& lmin, const std::string& name) {
  Table t = read_table(is, 3, name, true);
  lmin = header_int(t.header, "lmin", name);
  int lmax = header_int(t.header, "lmax", name);
  if (lmin < 0 || lmax < lmin) fail(name, 1, "header band must satisfy 0 <= lmin <= lmax");
  const int n = lmax - lmin + 1;
  linalg::Matrix m = linalg::Matrix::Zero(n, n);
  for (const auto& [ln, r] : t.rows) {
    int i = as_index(r[0], name, ln) - lmin, j = as_index(r[1], name, ln) - lmin;
    if (i < 0 || i >= n || j < 0 || j >= n) fail(name, ln, "entry outside the header band");
    m(i, j) = r[2];
  }
  return m;
}

void write_criteria(std::ostream& os, const std::vector<CriterionRow>& rows) {
  os << "window_id, criterion, theta0_deg, p, value\n";
  for (const auto& r : rows)
    os << r.window_id << ", " << r.criterion << ", " << num(r.theta0_deg) << ", "
       << (std::isinf(r.p) ? std::string("inf") : num(r.p)) << ", " << num(r.value) << "\n";
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw PreconditionError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw PreconditionError("cannot write " + path.string());
  f << text;
  if (!f) throw PreconditionError("write failed for " + path.string());
}

void write_family(const fs::path& manifest, const WindowFamily& family,
                  const std::vector<fs::path>& window_files) {
  if (window_files.size() != family.scales.size())
    throw PreconditionError("one window file per scale is required");
  json j;
  j["lmin"] = family.lmin;
  j["lmax"] = family.lmax;
  j["scales"] = json::array();
  fs::path base = manifest.parent_path();
  for (std::size_t i = 0; i < window_files.size(); ++i) {
    fs::path rel = base.empty() ? window_files[i] : window_files[i].lexically_relative(base);
    if (rel.empty()) rel = window_files[i];
    j["scales"].push_back({{"label", family.scales[i].label}, {"file", rel.generic_string()}});
  }
  write_text(manifest, j.dump(2) + "\n");
}

namespace {

json parse_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw PreconditionError(path.string() + ": " + e.what());
  }
}

}  // namespace

WindowFamily read_family(const fs::path& manifest) {
  json j = parse_json(manifest);
  const std::string name = manifest.string();
  try {
    WindowFamily f;
    for (const auto& s : j.at("scales")) {
      fs::path p = s.at("file").get<std::string>();
      if (p.is_relative()) p = manifest.parent_path() / p;
      std::istringstream in(read_text(p));
      f.scales.push_back({s.at("label").get<int>(), read_window(in, p.string())});
    }
    if (f.scales.empty()) throw DomainError(name + ": family has no scales");
    WindowFamily out = WindowFamily::from_scales(std::move(f.scales));
    if (j.contains("lmin")) out.lmin = j.at("lmin").get<int>();
    if (j.contains("lmax")) out.lmax = j.at("lmax").get<int>();
    if (out.lmin < 0 || out.lmax < out.lmin) throw PreconditionError(name + ": bad family range");
    return out;
  } catch (const json::exception& e) {
    throw PreconditionError(name + ": " + e.what());
  }
}

WeightFunction read_mask(const fs::path& spec, int default_lmax) {
  json j = parse_json(spec);
  const std::string name = spec.string();
  try {
    int lmax = j.contains("lmax") ? j.at("lmax").get<int>() : default_lmax;
    if (j.contains("axisym")) {
      std::vector<CapInterval> iv;
      for (const auto& e : j.at("axisym")) {
        if (!e.is_array() || e.size() != 3) throw PreconditionError(name + ": intervals are [start, end, value]");
        iv.push_back({e[0].get<double>(), e[1].get<double>(), e[2].get<double>()});
      }
      double apod = j.value("apod_deg", 2.0);
      return WeightFunction::axisymmetric(std::move(iv), apod, lmax);
    }
    if (j.contains("map")) {
      fs::path p = j.at("map").get<std::string>();
      if (p.is_relative()) p = spec.parent_path() / p;
      std::istringstream in(read_text(p));
      SphereMap m = read_map(in, p.string());
      if (m.grid->exactness_degree() < 2 * lmax)
        throw PreconditionError(name + ": map grid is too coarse for lmax " + std::to_string(lmax));
      return WeightFunction::from_map(m, lmax);
    }
    throw PreconditionError(name + ": mask spec needs \"axisym\" or \"map\"");
  } catch (const json::exception& e) {
    throw PreconditionError(name + ": " + e.what());
  }
}

}  // namespace sphwin::io
