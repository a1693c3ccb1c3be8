#include "sphwin/frames.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sphwin/errors.hpp"
#include "sphwin/specfun.hpp"

namespace sphwin {

using specfun::kPi;

SpectralWindow::SpectralWindow(int lmin, int lmax, std::vector<double> coeffs, std::string kind,
                               bool nonnegative)
    : lmin_(lmin), lmax_(lmax), coeffs_(std::move(coeffs)), kind_(std::move(kind)),
      nonnegative_(nonnegative) {
  if (lmin < 0 || lmax < lmin) throw DomainError("window band must satisfy 0 <= lmin <= lmax");
  if (coeffs_.size() != static_cast<std::size_t>(lmax - lmin + 1))
    throw DomainError("window coefficient count does not match its band");
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw DomainError("window coefficient is not finite");
    if (nonnegative_ && c < 0.0) throw DomainError("window flagged nonnegative has b_l < 0");
  }
}

std::vector<double> SpectralWindow::dense() const {
  std::vector<double> out(lmax_ + 1, 0.0);
  std::copy(coeffs_.begin(), coeffs_.end(), out.begin() + lmin_);
  return out;
}

SpectralWindow SpectralWindow::trimmed(std::optional<int> lmax_cap) const {
  int hi = lmax_cap ? std::min(lmax_, *lmax_cap) : lmax_;
  int lo = lmin_;
  while (lo <= hi && at(lo) == 0.0) ++lo;
  while (hi >= lo && at(hi) == 0.0) --hi;
  if (lo > hi) {
    int l = std::max(0, std::min(lmin_, lmax_cap.value_or(lmin_)));
    return SpectralWindow(l, l, {0.0}, kind_, nonnegative_);
  }
  return SpectralWindow(lo, hi, std::vector<double>(coeffs_.begin() + (lo - lmin_),
                                                    coeffs_.begin() + (hi - lmin_ + 1)),
                        kind_, nonnegative_);
}

WindowFamily WindowFamily::from_scales(std::vector<Scale> scales) {
  WindowFamily f;
  f.scales = std::move(scales);
  if (!f.scales.empty()) {
    f.lmin = f.scales.front().window.lmin();
    f.lmax = f.scales.front().window.lmax();
    for (const Scale& s : f.scales) {
      f.lmin = std::min(f.lmin, s.window.lmin());
      f.lmax = std::max(f.lmax, s.window.lmax());
    }
  }
  return f;
}

int WindowFamily::max_window_lmax() const {
  int l = 0;
  for (const Scale& s : scales) l = std::max(l, s.window.lmax());
  return l;
}

const Scale* WindowFamily::find(int label) const {
  for (const Scale& s : scales)
    if (s.label == label) return &s;
  return nullptr;
}

namespace {

std::vector<double> energy_per_degree(const WindowFamily& f, int lmax) {
  std::vector<double> s(lmax + 1, 0.0);
  for (const Scale& sc : f.scales)
    for (int l = sc.window.lmin(); l <= std::min(lmax, sc.window.lmax()); ++l) {
      double b = sc.window.at(l);
      s[l] += b * b;
    }
  return s;
}

double bump(double x) {
  double d = 1.0 - x * x;
  return d <= 0.0 ? 0.0 : std::exp(-1.0 / d);
}

double bump_integral(double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(bump, a, b, 5, 1e-13);
}

}  // namespace

std::optional<int> coverage_gap(const WindowFamily& family) {
  auto s = energy_per_degree(family, family.lmax);
  for (int l = std::max(0, family.lmin); l <= family.lmax; ++l)
    if (!(s[l] > 0.0)) return l;
  return std::nullopt;
}

double bump_primitive(double y) {
  static const double total = bump_integral(-1.0, 1.0);
  if (y <= -1.0) return 0.0;
  if (y >= 1.0) return total;
  // integrate from the nearer end to keep small values accurate
  return y <= 0.0 ? bump_integral(-1.0, y) : total - bump_integral(y, 1.0);
}

double ramp_value(Ramp ramp, int order, double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double s = 0.0;
  if (ramp == Ramp::Exponential) {
    s = bump_primitive(2.0 * t - 1.0) / bump_primitive(1.0);
  } else {
    if (order < 1 || order % 2 == 0) throw DomainError("smoothstep order must be odd and positive");
    // S_k(t) = t^{k+1} sum_i C(k+i, i) (1-t)^i, k = (order-1)/2
    int k = (order - 1) / 2;
    double binom = 1.0, pw = 1.0, acc = 0.0;
    for (int i = 0; i <= k; ++i) {
      acc += binom * pw;
      pw *= 1.0 - t;
      binom = binom * (k + i + 1) / (i + 1);
    }
    s = std::pow(t, k + 1) * acc;
  }
  return std::clamp(s, 0.0, 1.0);
}

double badic_profile(double x, double B, Ramp ramp, int order) {
  if (!(B > 1.0)) throw DomainError("dilation base B must exceed 1");
  double lo = 1.0 / B;
  if (x <= lo || x >= B) return 0.0;
  if (x <= 1.0) return ramp_value(ramp, order, (x - lo) / (1.0 - lo));
  return 1.0 - ramp_value(ramp, order, (x / B - lo) / (1.0 - lo));
}

WindowFamily spline_family(double B, int order, int jmax, Ramp ramp,
                           std::optional<int> lmax_cap) {
  if (!(B > 1.0) || !std::isfinite(B)) throw DomainError("dilation base B must exceed 1");
  if (order < 1 || order % 2 == 0) throw DomainError("spline order must be odd and positive");
  if (jmax < 1) throw DomainError("jmax must be at least 1");
  if (lmax_cap && *lmax_cap < 0) throw DomainError("lmax cap must be nonnegative");

  std::vector<Scale> scales;
  scales.push_back({-1, SpectralWindow(0, 0, {1.0}, "delta0", true)});
  for (int j = 0; j <= jmax; ++j) {
    double scale = std::pow(B, j);
    int lo = static_cast<int>(std::floor(scale / B));
    int hi = static_cast<int>(std::ceil(scale * B));
    std::vector<double> c(hi - lo + 1);
    for (int l = lo; l <= hi; ++l) c[l - lo] = badic_profile(l / scale, B, ramp, order);
    SpectralWindow w(lo, hi, std::move(c), "spline", true);
    scales.push_back({j, w.trimmed(lmax_cap)});
  }
  WindowFamily f;
  f.scales = std::move(scales);
  f.lmin = 0;
  f.lmax = static_cast<int>(std::floor(std::pow(B, jmax) * (1.0 + 1e-14)));
  if (lmax_cap) f.lmax = std::min(f.lmax, *lmax_cap);
  return f;
}

SpectralWindow sqrt_window(const SpectralWindow& h) {
  if (!h.nonnegative()) throw PreconditionError("square root needs a window flagged nonnegative");
  std::vector<double> c(h.coeffs().size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (h.coeffs()[i] < 0.0) throw DomainError("negative h_l under square root");
    c[i] = std::sqrt(h.coeffs()[i]);
  }
  std::string kind = h.kind().empty() ? "sqrt" : "sqrt_" + h.kind();
  return SpectralWindow(h.lmin(), h.lmax(), std::move(c), kind, true);
}

WindowFamily sqrt_family(const WindowFamily& h) {
  WindowFamily b = h;
  for (Scale& s : b.scales) s.window = sqrt_window(s.window);
  return b;
}

double bspline3(double x) {
  auto c = [](double v) { return std::pow(std::abs(v), 3); };
  return (c(x - 2) - 4 * c(x - 1) + 6 * c(x) - 4 * c(x + 1) + c(x + 2)) / 12.0;
}

double mexican_hat_profile(double theta, double R) {
  if (!(R > 0.0)) throw DomainError("Mexican hat scale R must be positive");
  double t = std::tan(0.5 * theta) / R;
  double u = 2.0 * t * t;
  if (u > 1400.0) return 0.0;
  return (1.0 - u) * std::exp(-u);
}

SpectralWindow reference_window(const ReferenceSpec& spec) {
  if (spec.kind == ReferenceKind::MexicanHat) {
    if (!(spec.R > 0.0) || !std::isfinite(spec.R))
      throw DomainError("Mexican hat scale R must be positive");
    if (spec.lmax < 0) throw DomainError("Mexican hat lmax must be nonnegative");
    int lmax = spec.lmax > 0 ? spec.lmax : static_cast<int>(std::ceil(10.0 / spec.R));
    // enough nodes to resolve the profile width R near the pole
    int nodes = std::max(2 * lmax + 2, static_cast<int>(std::ceil(40.0 / spec.R)));
    double R = spec.R;
    auto b = axisym_to_spectral([R](double th) { return mexican_hat_profile(th, R); }, lmax, nodes);
    return SpectralWindow(0, lmax, std::move(b), "mexican_hat");
  }

  if (!(spec.B > 1.0) || !std::isfinite(spec.B)) throw DomainError("dilation base B must exceed 1");
  if (spec.j < 0 || spec.j > 40) throw DomainError("scale index j out of range");
  double scale = std::pow(spec.B, spec.j);
  SpectralWindow full;
  switch (spec.kind) {
    case ReferenceKind::Exponential: {
      // b(x) = G(-8x+3) - G(-4x+3); nonzero for x in (1/4, 1)
      int hi = static_cast<int>(std::ceil(scale));
      std::vector<double> c(hi + 1);
      for (int l = 0; l <= hi; ++l) {
        double x = l / scale;
        c[l] = bump_primitive(-8 * x + 3) - bump_primitive(-4 * x + 3);
      }
      full = SpectralWindow(0, hi, std::move(c), "exponential");
      break;
    }
    case ReferenceKind::BSpline3: {
      // b(x) = 3/2 (B3(2x) - B3(x)); nonzero for x in (0, 2)
      int hi = static_cast<int>(std::ceil(2 * scale));
      std::vector<double> c(hi + 1);
      for (int l = 0; l <= hi; ++l) {
        double x = l / scale;
        c[l] = 1.5 * (bspline3(2 * x) - bspline3(x));
        if (x >= 2.0) c[l] = 0.0;
      }
      full = SpectralWindow(0, hi, std::move(c), "bspline3");
      break;
    }
    case ReferenceKind::SqrtSpline: {
      if (spec.order < 1 || spec.order % 2 == 0) throw DomainError("spline order must be odd and positive");
      int lo = static_cast<int>(std::floor(scale / spec.B));
      int hi = static_cast<int>(std::ceil(scale * spec.B));
      std::vector<double> c(hi - lo + 1);
      for (int l = lo; l <= hi; ++l)
        c[l - lo] = std::sqrt(badic_profile(l / scale, spec.B, spec.ramp, spec.order));
      full = SpectralWindow(lo, hi, std::move(c), "sqrt_spline", true);
      break;
    }
    case ReferenceKind::MexicanHat:
      break;
  }
  return full.trimmed();
}

WindowFamily dual_windows(const WindowFamily& family) {
  int top = std::max(family.lmax, family.max_window_lmax());
  auto s = energy_per_degree(family, top);
  for (int l = std::max(0, family.lmin); l <= family.lmax; ++l)
    if (!(s[l] > 0.0)) throw CoverageError("window family leaves a multipole uncovered", l);
  WindowFamily out = family;
  for (Scale& sc : out.scales) {
    const SpectralWindow& w = sc.window;
    std::vector<double> c(w.coeffs().size());
    for (int l = w.lmin(); l <= w.lmax(); ++l) c[l - w.lmin()] = s[l] > 0.0 ? w.at(l) / s[l] : 0.0;
    sc.window = SpectralWindow(w.lmin(), w.lmax(), std::move(c), "dual", w.nonnegative());
  }
  return out;
}

std::pair<double, double> frame_bounds(const WindowFamily& family) {
  if (family.scales.empty()) throw DomainError("frame bounds of an empty family");
  auto s = energy_per_degree(family, family.lmax);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int l = std::max(0, family.lmin); l <= family.lmax; ++l) {
    if (!(s[l] > 0.0)) continue;
    lo = std::min(lo, s[l]);
    hi = std::max(hi, s[l]);
  }
  if (hi == 0.0) throw DomainError("family covers no multipole of its range");
  return {lo, hi};
}

double needlet_profile(const SpectralWindow& window, double weight, double t) {
  if (!(std::abs(t) <= 1.0)) throw DomainError("needlet profile needs |t| <= 1");
  if (!(weight > 0.0)) throw DomainError("cubature weight must be positive");
  auto b = window.dense();
  return std::sqrt(weight) * spectral_to_axisym(b, t);
}

NeedletCoefficients needlet_analyze(const HarmonicCoefficients& alm, const SpectralWindow& window,
                                    GridPtr grid, int label) {
  if (!grid) throw PreconditionError("needlet analysis needs a grid");
  if (grid->exactness_degree() < 2 * window.lmax())
    throw PreconditionError("grid is not exact at twice the window lmax");
  auto b = window.dense();
  HarmonicCoefficients filtered = convolve_axisym(alm.resized(window.lmax()), b);
  SphereMap field = synthesize(filtered, grid);
  NeedletCoefficients out{label, grid, std::move(field.values)};
  for (const Ring& r : grid->rings()) {
    double s = std::sqrt(grid->ring_point_weight(r));
    for (int j = 0; j < r.n_phi; ++j) out.values[r.offset + j] *= s;
  }
  return out;
}

HarmonicCoefficients needlet_synthesize(const std::vector<NeedletCoefficients>& coeffs,
                                        const WindowFamily& duals) {
  int lmax = 0;
  for (const NeedletCoefficients& c : coeffs) {
    const Scale* d = duals.find(c.label);
    if (!d) throw PreconditionError("no dual window for needlet scale " + std::to_string(c.label));
    lmax = std::max(lmax, d->window.lmax());
  }
  HarmonicCoefficients out(lmax);
  for (const NeedletCoefficients& c : coeffs) {
    const SpectralWindow& dual = duals.find(c.label)->window;
    if (!c.grid || c.values.size() != c.grid->size())
      throw PreconditionError("needlet coefficients do not match their grid");
    if (c.grid->exactness_degree() < 2 * dual.lmax())
      throw PreconditionError("grid is not exact at twice the window lmax");
    SphereMap field(c.grid);
    for (const Ring& r : c.grid->rings()) {
      double s = 1.0 / std::sqrt(c.grid->ring_point_weight(r));
      for (int j = 0; j < r.n_phi; ++j) field.values[r.offset + j] = c.values[r.offset + j] * s;
    }
    auto bd = dual.dense();
    out += convolve_axisym(analyze(field, dual.lmax()), bd).resized(lmax);
  }
  return out;
}

std::vector<NeedletCoefficients> needlet_analyze_family(const HarmonicCoefficients& alm,
                                                        const WindowFamily& family,
                                                        GridPolicy policy) {
  std::vector<NeedletCoefficients> out;
  GridPtr shared;
  if (policy == GridPolicy::Shared) shared = build_grid(family.max_window_lmax());
  for (const Scale& s : family.scales) {
    GridPtr g = shared ? shared : build_grid(s.window.lmax());
    out.push_back(needlet_analyze(alm, s.window, g, s.label));
  }
  return out;
}

HarmonicCoefficients smooth(const HarmonicCoefficients& alm, const SpectralWindow& analysis,
                            const SpectralWindow& synthesis) {
  int lmax = std::max(analysis.lmax(), synthesis.lmax());
  std::vector<double> h(lmax + 1);
  for (int l = 0; l <= lmax; ++l) h[l] = analysis.at(l) * synthesis.at(l);
  return convolve_axisym(alm, h);
}

}  // namespace sphwin
