#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sphwin/errors.hpp"
#include "sphwin/frames.hpp"
#include "sphwin/io.hpp"
#include "sphwin/mise.hpp"
#include "sphwin/slepian.hpp"
#include "sphwin/specfun.hpp"

#ifndef SPHWIN_VERSION
#define SPHWIN_VERSION "dev"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sphwin;

namespace {

constexpr double kDeg = specfun::kPi / 180.0;
constexpr int kUsage = 2, kPrecondition = 3, kNumeric = 4;

struct Run {
  fs::path out = ".";
  std::uint64_t seed = 0;
  std::vector<fs::path> outputs;
  json extra = json::object();

  fs::path file(const std::string& name) {
    fs::path p = out / name;
    outputs.push_back(p);
    return p;
  }
};

template <class F>
void write_file(const fs::path& p, F&& writer) {
  std::ostringstream ss;
  writer(ss);
  io::write_text(p, ss.str());
}

template <class T, class R>
T load(const fs::path& p, R reader) {
  std::istringstream in(io::read_text(p));
  return reader(in, p.string());
}

std::string label_name(int label) {
  char buf[16];
  if (label < 0) return "dc";
  std::snprintf(buf, sizeof buf, "j%02d", label);
  return buf;
}

// Table-layout criteria for one window at the requested openings
void report_window(const std::string& id, const SpectralWindow& w, const std::vector<double>& thetas,
                   std::vector<io::CriterionRow>& rows) {
  const double inf = std::numeric_limits<double>::infinity();
  auto guarded = [](auto&& f) {
    try {
      return f();
    } catch (const DomainError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  for (double p : {2.0, 1.0, inf})
    for (double t : thetas)
      rows.push_back({id, p == 2.0 ? "concentration" : "lp", t, p,
                      guarded([&] { return p == 2.0 ? concentration(w, t * kDeg) : lp_concentration(w, t * kDeg, p); })});
  rows.push_back({id, "heisenberg", 0.0, 0.0, guarded([&] { return uncertainty_product(w); })});
}

double parse_p(const std::string& s) {
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  if (s == "1") return 1.0;
  if (s == "2") return 2.0;
  throw DomainError("p must be 1, 2 or inf");
}

std::vector<double> alpha_grid(const std::vector<double>& g) {
  if (g.size() != 3 || !(g[2] > 0.0) || g[1] < g[0]) throw DomainError("--alpha-grid needs A0 <= A1 and STEP > 0");
  std::vector<double> a;
  const int n = static_cast<int>(std::floor((g[1] - g[0]) / g[2] + 1e-9));
  for (int i = 0; i <= n; ++i) a.push_back(g[0] + i * g[2]);
  return a;
}

// ---------------------------------------------------------------- config

// Appends `--key value...` for config entries not given on the command line.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
  std::vector<std::string> out = args;
  fs::path cfg;
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    if (args[i] == "--config") cfg = args[i + 1];
  for (const auto& a : args)
    if (a.rfind("--config=", 0) == 0) cfg = a.substr(9);
  if (cfg.empty()) return out;
  json j;
  try {
    j = json::parse(io::read_text(cfg));
  } catch (const json::exception& e) {
    throw CLI::ValidationError("--config", e.what());
  }
  if (!j.is_object()) throw CLI::ValidationError("--config", "config must be a JSON object");
  auto present = [&](const std::string& flag) {
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
  };
  auto scalar = [](const json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  };
  for (const auto& [key, v] : j.items()) {
    std::string flag = "--" + key;
    if (key == "config" || present(flag)) continue;
    if (v.is_boolean()) {
      if (v.get<bool>()) out.push_back(flag);
      continue;
    }
    out.push_back(flag);
    if (v.is_array())
      for (const auto& e : v) out.push_back(scalar(e));
    else
      out.push_back(scalar(v));
  }
  return out;
}

// numbers and lists stay typed in the manifest; everything else is a string
json typed(const std::string& s) {
  json v = json::parse(s, nullptr, false);
  if (!v.is_discarded() && (v.is_number() || v.is_array())) return v;
  return s;
}

json resolved_options(const CLI::App* app) {
  json j = json::object();
  for (const CLI::Option* opt : app->get_options()) {
    std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    std::vector<std::string> vals = opt->count() ? opt->results() : std::vector<std::string>{};
    if (vals.empty()) {
      std::string d = opt->get_default_str();
      if (d.empty()) continue;
      vals = {d};
    }
    if (vals.size() == 1) {
      j[name] = typed(vals[0]);
    } else {
      json arr = json::array();
      for (const auto& v : vals) arr.push_back(typed(v));
      j[name] = arr;
    }
  }
  return j;
}

// ---------------------------------------------------------------- commands

struct SplineArgs {
  double B = 2.0;
  int order = 3;
  int jmax = 0;
  std::string ramp = "smoothstep";
  int lmax = -1;
};

void design_spline(const SplineArgs& a, const std::vector<double>& thetas, Run& run) {
  Ramp ramp = a.ramp == "exponential" ? Ramp::Exponential : Ramp::Smoothstep;
  std::optional<int> cap;
  if (a.lmax >= 0) cap = a.lmax;
  WindowFamily h = spline_family(a.B, a.order, a.jmax, ramp, cap);
  WindowFamily b = sqrt_family(h);
  // the delta_0 scale only carries the monopole; the dilated windows cover l >= 1
  WindowFamily scales;
  for (const Scale& s : b.scales)
    if (s.label >= 0) scales.scales.push_back(s);
  scales.lmin = 1;
  scales.lmax = b.lmax;
  std::vector<fs::path> files;
  std::vector<io::CriterionRow> rows;
  for (const Scale& s : scales.scales) {
    fs::path p = run.file("window_" + label_name(s.label) + ".csv");
    write_file(p, [&](std::ostream& os) { io::write_window(os, s.window); });
    files.push_back(p);
    report_window(label_name(s.label), s.window, thetas, rows);
  }
  io::write_family(run.file("family.json"), scales, files);
  write_file(run.file("criteria.csv"), [&](std::ostream& os) { io::write_criteria(os, rows); });
  auto [lo, hi] = frame_bounds(scales);
  run.extra["frame_bounds"] = {lo, hi};
}

void design_slepian(const std::vector<int>& band, double theta0, std::optional<double> a,
                    const std::vector<double>& thetas, Run& run) {
  ConcentrationProblem prob{band[0], band[1], theta0 * kDeg, a};
  SlepianDesign d = sphwin::design_slepian(prob);
  write_file(run.file("window_slepian.csv"), [&](std::ostream& os) { io::write_window(os, d.window); });
  std::vector<io::CriterionRow> rows;
  report_window("slepian", d.window, thetas, rows);
  write_file(run.file("criteria.csv"), [&](std::ostream& os) { io::write_criteria(os, rows); });
  run.extra["penalty_weight"] = d.a;
  run.extra["shannon_number"] = shannon_number(coupling_matrix(band[0], band[1], theta0 * kDeg));
}

struct MiseArgs {
  std::vector<int> band;
  fs::path mask, weight, spectrum;
  int mask_lmax = -1;
  int n_mc = 0;
};

MiseProblem load_problem(const MiseArgs& a) {
  if (a.band.size() != 2) throw DomainError("--band needs LMIN LMAX");
  int wl = a.mask_lmax >= 0 ? a.mask_lmax : 3 * a.band[1];
  PowerSpectrum c = load<PowerSpectrum>(a.spectrum, io::read_spectrum);
  WeightFunction w = io::read_mask(a.mask, wl);
  std::optional<WeightFunction> d;
  if (!a.weight.empty()) d = io::read_mask(a.weight, wl);
  return MiseProblem::make(a.band[0], a.band[1], std::move(c), std::move(w), std::move(d));
}

void design_mise(const MiseArgs& a, const std::vector<double>& thetas, Run& run) {
  MiseProblem p = load_problem(a);
  QMatrix Q = a.n_mc > 0 ? q_matrix_mc(p, a.n_mc, run.seed) : q_matrix_axisym(p);
  SpectralWindow w = mise_optimal_window(Q, p.spectrum);
  write_file(run.file("window_mise.csv"), [&](std::ostream& os) { io::write_window(os, w); });
  write_file(run.file("q.csv"), [&](std::ostream& os) { io::write_band_matrix(os, Q.lmin, Q.q); });
  if (Q.se) write_file(run.file("q_se.csv"), [&](std::ostream& os) { io::write_band_matrix(os, Q.lmin, *Q.se); });
  std::vector<io::CriterionRow> rows;
  report_window("mise", w, thetas, rows);
  rows.push_back({"mise", "mise", 0.0, 0.0, mise_value(Q, p.spectrum, w)});
  write_file(run.file("criteria.csv"), [&](std::ostream& os) { io::write_criteria(os, rows); });
}

void design_reference(const std::string& kind, const ReferenceSpec& base, const std::vector<double>& thetas,
                      Run& run) {
  static const std::map<std::string, ReferenceKind> kinds{{"exponential", ReferenceKind::Exponential},
                                                           {"bspline", ReferenceKind::BSpline3},
                                                           {"mexican-hat", ReferenceKind::MexicanHat},
                                                           {"sqrt-spline", ReferenceKind::SqrtSpline}};
  ReferenceSpec s = base;
  s.kind = kinds.at(kind);
  SpectralWindow w = reference_window(s);
  write_file(run.file("window_" + kind + ".csv"), [&](std::ostream& os) { io::write_window(os, w); });
  std::vector<io::CriterionRow> rows;
  report_window(kind, w, thetas, rows);
  write_file(run.file("criteria.csv"), [&](std::ostream& os) { io::write_criteria(os, rows); });
}

void cmd_analyze(const fs::path& alm_path, const fs::path& map_path, const fs::path& family_path,
                 const std::string& grid, Run& run) {
  WindowFamily family = io::read_family(family_path);
  HarmonicCoefficients alm;
  if (!alm_path.empty()) {
    alm = load<HarmonicCoefficients>(alm_path, io::read_alm);
  } else {
    SphereMap m = load<SphereMap>(map_path, io::read_map);
    alm = analyze(m, m.grid->lmax());
  }
  auto coeffs = needlet_analyze_family(alm, family, grid == "per-scale" ? GridPolicy::PerScale : GridPolicy::Shared);
  json manifest;
  manifest["scales"] = json::array();
  for (const auto& c : coeffs) {
    std::string name = "beta_" + label_name(c.label) + ".csv";
    SphereMap m(c.grid, c.values);
    write_file(run.file(name), [&](std::ostream& os) { io::write_map(os, m); });
    manifest["scales"].push_back({{"label", c.label}, {"file", name}});
  }
  io::write_text(run.file("coefficients.json"), manifest.dump(2) + "\n");
}

void cmd_synthesize(const fs::path& coeffs_path, const fs::path& family_path, const fs::path& reference,
                    Run& run) {
  WindowFamily family = io::read_family(family_path);
  json j;
  try {
    j = json::parse(io::read_text(coeffs_path));
  } catch (const json::exception& e) {
    throw PreconditionError(coeffs_path.string() + ": " + e.what());
  }
  std::vector<NeedletCoefficients> coeffs;
  try {
    for (const auto& s : j.at("scales")) {
      fs::path p = s.at("file").get<std::string>();
      if (p.is_relative()) p = coeffs_path.parent_path() / p;
      SphereMap m = load<SphereMap>(p, io::read_map);
      coeffs.push_back({s.at("label").get<int>(), m.grid, m.values});
    }
  } catch (const json::exception& e) {
    throw PreconditionError(coeffs_path.string() + ": " + e.what());
  }
  HarmonicCoefficients rec = needlet_synthesize(coeffs, dual_windows(family));
  write_file(run.file("alm_reconstructed.csv"), [&](std::ostream& os) { io::write_alm(os, rec); });
  if (!reference.empty()) {
    HarmonicCoefficients ref = load<HarmonicCoefficients>(reference, io::read_alm);
    // the duals reproduce every multipole the family covers, from lmin up
    HarmonicCoefficients band(std::max(ref.lmax(), rec.lmax()));
    for (int l = family.lmin; l <= std::min(rec.lmax(), ref.lmax()); ++l) {
      double energy = 0.0;
      for (const Scale& s : family.scales) energy += s.window.at(l) * s.window.at(l);
      if (energy > 0.0)
        for (int m = 0; m <= l; ++m) band(l, m) = ref(l, m);
    }
    double err = max_abs_difference(band, rec);
    run.extra["max_abs_error"] = err;
    std::printf("max_abs_error %.3e\n", err);
  }
}

void cmd_simulate(const fs::path& spectrum, int n, const std::string& format, Run& run) {
  if (n < 0) throw DomainError("--n must be nonnegative");
  PowerSpectrum c = load<PowerSpectrum>(spectrum, io::read_spectrum);
  GridPtr grid = format == "map" ? build_grid(c.support()) : nullptr;
  for (int i = 0; i < n; ++i) {
    char name[48];
    std::snprintf(name, sizeof name, "realization_%04d.csv", i);
    HarmonicCoefficients a = simulate_field(c, run.seed, static_cast<std::uint64_t>(i));
    if (grid) {
      SphereMap m = synthesize(a, grid);
      write_file(run.file(name), [&](std::ostream& os) { io::write_map(os, m); });
    } else {
      write_file(run.file(name), [&](std::ostream& os) { io::write_alm(os, a); });
    }
  }
}

struct EvalArgs {
  std::string criterion;
  std::vector<std::string> windows;
  std::vector<double> thetas{0.5, 1.0, 1.5, 5.0};
  std::vector<std::string> ps{"2"};
  MiseArgs problem;
  int n_mc = 30;
  std::vector<double> alphas{0.0, 1.0, 0.01};
};

std::vector<std::pair<std::string, SpectralWindow>> load_windows(const std::vector<std::string>& paths) {
  std::vector<std::pair<std::string, SpectralWindow>> out;
  for (const auto& p : paths)
    out.emplace_back(fs::path(p).stem().string(), load<SpectralWindow>(p, io::read_window));
  return out;
}

void cmd_evaluate(EvalArgs a, Run& run) {
  auto windows = load_windows(a.windows);
  auto need = [&](bool ok, const char* what) {
    if (!ok) throw CLI::RequiredError(what);
  };
  std::ostringstream os;
  if (a.criterion == "concentration" || a.criterion == "lp" || a.criterion == "heisenberg") {
    std::vector<io::CriterionRow> rows;
    for (const auto& [id, w] : windows) {
      if (a.criterion == "heisenberg") {
        // single-parity windows have no first moment; reported as nan
        double v = std::numeric_limits<double>::quiet_NaN();
        try {
          v = uncertainty_product(w);
        } catch (const DomainError&) {
        }
        rows.push_back({id, "heisenberg", 0.0, 0.0, v});
        continue;
      }
      std::vector<std::string> ps = a.criterion == "concentration" ? std::vector<std::string>{"2"} : a.ps;
      for (const auto& ptxt : ps) {
        double p = parse_p(ptxt);
        for (double t : a.thetas)
          rows.push_back({id, a.criterion, t, p, p == 2.0 ? concentration(w, t * kDeg) : lp_concentration(w, t * kDeg, p)});
      }
    }
    io::write_criteria(os, rows);
  } else if (a.criterion == "mask-error") {
    need(!a.problem.mask.empty(), "--mask");
    need(!a.problem.spectrum.empty(), "--spectrum");
    auto alphas = alpha_grid(a.alphas);
    os << "window_id, alpha, value, se\n";
    for (const auto& [id, w] : windows) {
      MiseArgs pa = a.problem;
      pa.band = {w.lmin(), w.lmax()};
      MiseProblem p = load_problem(pa);
      MaskErrorCurve c = mask_error_curve(p, w, alphas, a.n_mc, run.seed);
      auto se = c.standard_error();
      for (std::size_t k = 0; k < alphas.size(); ++k)
        os << id << ", " << alphas[k] << ", " << c.values[k] << ", " << se[k] << "\n";
    }
  } else if (a.criterion == "mise") {
    need(!a.problem.mask.empty(), "--mask");
    need(!a.problem.spectrum.empty(), "--spectrum");
    os << "window_id, realization, value\n";
    for (const auto& [id, w] : windows) {
      MiseArgs pa = a.problem;
      pa.band = {w.lmin(), w.lmax()};
      MiseProblem p = load_problem(pa);
      GridPtr g = build_grid(w.lmax() + (p.weight.lmax() + 1) / 2 + 1);
      auto d = p.weight.sample(g).values;
      // per-realization int D eps^2 / (4 pi); its mean is R(b)
      for (int i = 0; i < a.n_mc; ++i) {
        SphereMap e = error_coefficients(simulate_field(p.spectrum, run.seed, i), p.mask, w, g, p.spectrum);
        for (std::size_t k = 0; k < e.values.size(); ++k) e.values[k] *= e.values[k] * d[k];
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", integrate(e) / specfun::kFourPi);
        os << id << ", " << i << ", " << buf << "\n";
      }
    }
  } else {
    throw CLI::ValidationError("--criterion", "unknown criterion " + a.criterion);
  }
  io::write_text(run.file(a.criterion + ".csv"), os.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spherical needlet window design and evaluation", "sphwin_cli"};
  app.set_version_flag("--version", SPHWIN_VERSION);
  app.require_subcommand(1);

  Run run;
  std::string config;
  std::vector<double> thetas{0.5, 1.0, 1.5, 5.0};
  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", run.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", run.seed, "Random seed")->capture_default_str();
    sub->add_option("--config", config, "JSON file whose keys mirror the flags");
  };
  auto report = [&](CLI::App* sub) {
    sub->add_option("--report-theta", thetas, "Openings (degrees) for the criteria report")->capture_default_str();
  };

  CLI::App* design = app.add_subcommand("design", "Design windows");
  design->require_subcommand(1);

  SplineArgs spline;
  CLI::App* d_spline = design->add_subcommand("spline", "Tight B-adic spline family");
  d_spline->add_option("--B", spline.B, "Dilation base")->required();
  d_spline->add_option("--order", spline.order, "Spline order (odd)")->capture_default_str();
  d_spline->add_option("--jmax", spline.jmax, "Largest scale index")->required();
  d_spline->add_option("--ramp", spline.ramp, "smoothstep or exponential")
      ->check(CLI::IsMember({"smoothstep", "exponential"}))
      ->capture_default_str();
  d_spline->add_option("--lmax", spline.lmax, "Clip every window at this multipole");
  common(d_spline);
  report(d_spline);

  std::vector<int> band;
  double theta0 = 0.0;
  std::optional<double> penalty;
  CLI::App* d_slep = design->add_subcommand("slepian", "Window best concentrated in a polar cap");
  d_slep->add_option("--band", band, "LMIN LMAX")->expected(2)->required();
  d_slep->add_option("--theta0", theta0, "Cap opening (degrees)")->required();
  d_slep->add_option("--a", penalty, "Curvature penalty weight; swept when absent");
  common(d_slep);
  report(d_slep);

  MiseArgs mise;
  CLI::App* d_mise = design->add_subcommand("mise", "Window minimizing the integrated masking error");
  d_mise->add_option("--band", mise.band, "LMIN LMAX")->expected(2)->required();
  d_mise->add_option("--mask", mise.mask, "Mask spec (JSON)")->required();
  d_mise->add_option("--weight", mise.weight, "Reconstruction weight spec (JSON); defaults to the mask");
  d_mise->add_option("--spectrum", mise.spectrum, "Spectrum CSV")->required();
  d_mise->add_option("--mask-lmax", mise.mask_lmax, "Mask multipole cutoff (default 3*LMAX)");
  d_mise->add_option("--n-mc", mise.n_mc, "Monte-Carlo realizations for Q (0: analytic)")->capture_default_str();
  common(d_mise);
  report(d_mise);

  std::string ref_kind;
  ReferenceSpec ref;
  std::string ref_ramp = "exponential";
  CLI::App* d_ref = design->add_subcommand("reference", "Reference windows from the literature");
  d_ref->add_option("--kind", ref_kind, "exponential, bspline, mexican-hat or sqrt-spline")
      ->check(CLI::IsMember({"exponential", "bspline", "mexican-hat", "sqrt-spline"}))
      ->required();
  d_ref->add_option("--j", ref.j, "Scale index")->capture_default_str();
  d_ref->add_option("--B", ref.B, "Dilation base")->capture_default_str();
  d_ref->add_option("--order", ref.order, "Spline order")->capture_default_str();
  d_ref->add_option("--ramp", ref_ramp, "smoothstep or exponential")
      ->check(CLI::IsMember({"smoothstep", "exponential"}))
      ->capture_default_str();
  d_ref->add_option("--R", ref.R, "Mexican hat scale (radians)")->capture_default_str();
  d_ref->add_option("--lmax", ref.lmax, "Mexican hat truncation (0: automatic)")->capture_default_str();
  common(d_ref);
  report(d_ref);

  fs::path alm_path, map_path, family_path, coeffs_path, reference;
  std::string grid = "shared";
  CLI::App* c_an = app.add_subcommand("analyze", "Needlet coefficients of a field");
  auto* in_alm = c_an->add_option("--alm", alm_path, "Input multipoles CSV");
  auto* in_map = c_an->add_option("--map", map_path, "Input map CSV");
  in_alm->excludes(in_map);
  c_an->add_option("--family", family_path, "Family manifest (JSON)")->required();
  c_an->add_option("--grid", grid, "shared or per-scale")
      ->check(CLI::IsMember({"shared", "per-scale"}))
      ->capture_default_str();
  common(c_an);

  CLI::App* c_syn = app.add_subcommand("synthesize", "Field from needlet coefficients");
  c_syn->add_option("--coeffs", coeffs_path, "Coefficient manifest written by analyze")->required();
  c_syn->add_option("--family", family_path, "Family manifest (JSON)")->required();
  c_syn->add_option("--reference", reference, "Multipoles to compare the reconstruction with");
  common(c_syn);

  fs::path spectrum;
  int n_sim = 0;
  std::string format = "alm";
  CLI::App* c_sim = app.add_subcommand("simulate", "Gaussian isotropic realizations");
  c_sim->add_option("--spectrum", spectrum, "Spectrum CSV")->required();
  c_sim->add_option("--n", n_sim, "Number of realizations")->required();
  c_sim->add_option("--format", format, "alm or map")->check(CLI::IsMember({"alm", "map"}))->capture_default_str();
  common(c_sim);

  EvalArgs ev;
  CLI::App* c_ev = app.add_subcommand("evaluate", "Criterion reports for window files");
  c_ev->add_option("--criterion", ev.criterion, "concentration, lp, mask-error, mise or heisenberg")
      ->check(CLI::IsMember({"concentration", "lp", "mask-error", "mise", "heisenberg"}))
      ->required();
  c_ev->add_option("--window", ev.windows, "Window CSV (repeatable)")->required();
  c_ev->add_option("--theta0", ev.thetas, "Openings (degrees)")->capture_default_str();
  c_ev->add_option("--p", ev.ps, "Exponents: 1, 2, inf")->capture_default_str();
  c_ev->add_option("--mask", ev.problem.mask, "Mask spec (JSON)");
  c_ev->add_option("--weight", ev.problem.weight, "Reconstruction weight spec (JSON)");
  c_ev->add_option("--spectrum", ev.problem.spectrum, "Spectrum CSV");
  c_ev->add_option("--mask-lmax", ev.problem.mask_lmax, "Mask multipole cutoff (default 3*window lmax)");
  c_ev->add_option("--n-mc", ev.n_mc, "Monte-Carlo realizations")->capture_default_str();
  c_ev->add_option("--alpha-grid", ev.alphas, "A0 A1 STEP")->expected(3)->capture_default_str();
  common(c_ev);

  std::vector<std::string> args;
  for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
  try {
    std::vector<std::string> fwd(args.rbegin(), args.rend());
    fwd = merge_config(fwd);
    args.assign(fwd.rbegin(), fwd.rend());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPrecondition;
  }

  CLI::App* leaf = &app;
  std::string command;
  while (!leaf->get_subcommands().empty()) {
    leaf = leaf->get_subcommands().front();
    command += (command.empty() ? "" : " ") + leaf->get_name();
  }

  try {
    std::error_code ec;
    fs::create_directories(run.out, ec);
    if (ec) throw PreconditionError("cannot create " + run.out.string() + ": " + ec.message());

    if (leaf == d_spline) design_spline(spline, thetas, run);
    else if (leaf == d_slep) design_slepian(band, theta0, penalty, thetas, run);
    else if (leaf == d_mise) design_mise(mise, thetas, run);
    else if (leaf == d_ref) {
      ref.ramp = ref_ramp == "smoothstep" ? Ramp::Smoothstep : Ramp::Exponential;
      design_reference(ref_kind, ref, thetas, run);
    } else if (leaf == c_an) {
      if (alm_path.empty() == map_path.empty()) throw CLI::RequiredError("--alm or --map");
      cmd_analyze(alm_path, map_path, family_path, grid, run);
    } else if (leaf == c_syn) cmd_synthesize(coeffs_path, family_path, reference, run);
    else if (leaf == c_sim) cmd_simulate(spectrum, n_sim, format, run);
    else if (leaf == c_ev) cmd_evaluate(ev, run);

    json manifest;
    manifest["tool"] = "sphwin";
    manifest["version"] = SPHWIN_VERSION;
    manifest["command"] = command;
    manifest["config"] = resolved_options(leaf);
    manifest["seed"] = run.seed;
    manifest["outputs"] = json::array();
    for (const auto& p : run.outputs) manifest["outputs"].push_back(p.filename().string());
    for (const auto& [k, v] : run.extra.items()) manifest[k] = v;
    io::write_text(run.out / "manifest.json", manifest.dump(2) + "\n");
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition error: " << e.what() << "\n";
    return kPrecondition;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::out_of_range& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  }
  return 0;
}
