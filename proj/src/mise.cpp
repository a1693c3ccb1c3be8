#include "sphwin/mise.hpp"

#include <algorithm>
#include <cmath>

#include "sphwin/errors.hpp"
#include "sphwin/specfun.hpp"

namespace sphwin {

using linalg::Matrix;
using linalg::Vector;
using specfun::kFourPi;
using specfun::kPi;

PowerSpectrum::PowerSpectrum(std::vector<double> c) : c_(std::move(c)) {
  if (c_.empty()) c_.push_back(0.0);
  for (double v : c_)
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("power spectrum entries must be finite and >= 0");
}

int PowerSpectrum::support() const {
  for (int l = lmax(); l > 0; --l)
    if (c_[l] > 0.0) return l;
  return 0;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

Vector random_unit_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vector v(n);
  do {
    for (int i = 0; i < n; ++i) v(i) = g(rng);
  } while (v.norm() == 0.0);
  return v.normalized();
}

// ---------------------------------------------------------------- weights

namespace {

double interval_profile(const std::vector<CapInterval>& iv, double apod, double theta) {
  double w = 1.0;
  for (const CapInterval& c : iv) {
    double a = c.theta_start * kPi / 180.0, b = c.theta_end * kPi / 180.0;
    double v;
    if (theta >= a && theta <= b) {
      v = c.value;
    } else {
      double d = theta < a ? a - theta : theta - b;
      if (apod > 0.0 && d < apod)
        v = c.value + (1.0 - c.value) * 0.5 * (1.0 - std::cos(kPi * d / apod));
      else
        v = 1.0;
    }
    w = std::min(w, v);
  }
  return std::clamp(w, 0.0, 1.0);
}

}  // namespace

WeightFunction WeightFunction::axisymmetric(std::vector<CapInterval> intervals, double apod_deg,
                                            int lmax) {
  if (lmax < 0) throw DomainError("weight lmax must be nonnegative");
  if (!(apod_deg >= 0.0)) throw DomainError("apodization width must be nonnegative");
  for (const CapInterval& c : intervals)
    if (!(c.theta_start >= 0.0 && c.theta_start <= c.theta_end && c.theta_end <= 180.0))
      throw DomainError("mask interval must satisfy 0 <= start <= end <= 180 degrees");

  if (intervals.empty()) {
    WeightFunction w = constant(1.0);
    w.w_ = w.w_.resized(lmax);
    return w;
  }

  const double apod = apod_deg * kPi / 180.0;
  std::vector<double> cuts{0.0, kPi};
  for (const CapInterval& c : intervals) {
    double a = c.theta_start * kPi / 180.0, b = c.theta_end * kPi / 180.0;
    for (double t : {a - apod, a, b, b + apod})
      if (t > 0.0 && t < kPi) cuts.push_back(t);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // profile is smooth between cuts; integrate f(theta) P_l(cos theta) sin theta per piece
  std::vector<double> acc(lmax + 1, 0.0);
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    QuadratureRule q = gauss_legendre_rule(lmax + 40, cuts[p], cuts[p + 1]);
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
      double th = q.nodes[k];
      double f = interval_profile(intervals, apod, th) * std::sin(th) * q.weights[k];
      if (f == 0.0) continue;
      auto P = specfun::legendre_p_all(lmax, std::cos(th));
      for (int l = 0; l <= lmax; ++l) acc[l] += f * P[l];
    }
  }
  WeightFunction w;
  w.w_ = HarmonicCoefficients(lmax);
  for (int l = 0; l <= lmax; ++l) w.w_(l, 0) = 2 * kPi * std::sqrt((2 * l + 1) / kFourPi) * acc[l];
  w.axisym_ = true;
  w.profile_ = [intervals = std::move(intervals), apod](double th) {
    return interval_profile(intervals, apod, th);
  };
  return w;
}

WeightFunction WeightFunction::constant(double value) {
  WeightFunction w;
  w.w_ = HarmonicCoefficients(0);
  w.w_(0, 0) = value * std::sqrt(kFourPi);
  w.axisym_ = true;
  w.profile_ = [value](double) { return value; };
  return w;
}

WeightFunction WeightFunction::from_map(const SphereMap& map, int lmax) {
  WeightFunction w;
  w.w_ = analyze(map, lmax);
  w.axisym_ = false;
  return w;
}

WeightFunction WeightFunction::from_multipoles(HarmonicCoefficients coeffs, bool axisymmetric) {
  if (axisymmetric)
    for (int l = 0; l <= coeffs.lmax(); ++l)
      for (int m = 1; m <= l; ++m)
        if (coeffs(l, m) != std::complex<double>(0.0))
          throw PreconditionError("axisymmetric weight has m != 0 multipoles");
  WeightFunction w;
  w.w_ = std::move(coeffs);
  w.axisym_ = axisymmetric;
  return w;
}

double WeightFunction::profile(double theta) const {
  if (!profile_) throw PreconditionError("weight has no closed-form profile");
  return profile_(theta);
}

SphereMap WeightFunction::sample(GridPtr grid) const { return synthesize(w_, std::move(grid)); }

WeightFunction WeightFunction::complement() const {
  WeightFunction c = *this;
  c.w_ *= -1.0;
  c.w_(0, 0) += std::sqrt(kFourPi);
  if (profile_) c.profile_ = [f = profile_](double th) { return 1.0 - f(th); };
  return c;
}

std::vector<double> WeightFunction::pseudo_spectrum() const {
  return sphwin::pseudo_spectrum(w_).values();
}

MiseProblem MiseProblem::make(int lmin, int lmax, PowerSpectrum spectrum, WeightFunction mask,
                              std::optional<WeightFunction> weight) {
  MiseProblem p;
  p.lmin = lmin;
  p.lmax = lmax;
  p.spectrum = std::move(spectrum);
  p.weight = weight ? std::move(*weight) : mask;
  p.mask = std::move(mask);
  p.validate();
  return p;
}

void MiseProblem::validate() const {
  if (lmin < 0 || lmax < lmin) throw DomainError("band must satisfy 0 <= lmin <= lmax");
  for (int l = lmin; l <= lmax; ++l)
    if (!(spectrum.at(l) > 0.0)) throw DomainError("sigma_l vanishes at l = " + std::to_string(l));
}

// ---------------------------------------------------------------- fields

HarmonicCoefficients simulate_field(const PowerSpectrum& spectrum, std::uint64_t seed,
                                    std::uint64_t stream) {
  auto rng = make_rng(seed, stream);
  std::normal_distribution<double> g;
  const int L = spectrum.support();
  HarmonicCoefficients a(L);
  for (int l = 0; l <= L; ++l) {
    double s = std::sqrt(spectrum.at(l));
    a(l, 0) = s * g(rng);
    double h = s * std::sqrt(0.5);
    for (int m = 1; m <= l; ++m) {
      double re = g(rng);
      double im = g(rng);
      a(l, m) = {h * re, h * im};
    }
  }
  return a;
}

PowerSpectrum pseudo_spectrum(const HarmonicCoefficients& alm) {
  std::vector<double> c(alm.lmax() + 1);
  for (int l = 0; l <= alm.lmax(); ++l) {
    double s = std::norm(alm(l, 0));
    for (int m = 1; m <= l; ++m) s += 2.0 * std::norm(alm(l, m));
    c[l] = s / (2 * l + 1);
  }
  return PowerSpectrum(std::move(c));
}

Matrix coupling_matrix_master(const WeightFunction& mask, int lmax) {
  if (lmax < 0) throw DomainError("lmax must be nonnegative");
  auto cw = mask.pseudo_spectrum();
  auto cw_at = [&](int l) { return l < static_cast<int>(cw.size()) ? cw[l] : 0.0; };
  Matrix M = Matrix::Zero(lmax + 1, lmax + 1);
  for (int l = 0; l <= lmax; ++l)
    for (int lp = 0; lp <= lmax; ++lp) {
      auto f = specfun::wigner3j_family(l, lp, 0, 0);
      double s = 0.0;
      for (int lpp = f.l1min; lpp <= std::min(f.l1max, static_cast<int>(cw.size()) - 1); ++lpp) {
        double v = f.at(lpp);
        s += (2 * lpp + 1) * cw_at(lpp) * v * v;
      }
      M(l, lp) = (2 * lp + 1) / kFourPi * s;
    }
  return M;
}

SpectrumEstimate unbiased_spectrum(const PowerSpectrum& pseudo, const Matrix& M) {
  const int n = pseudo.lmax() + 1;
  if (M.rows() != n || M.cols() != n) throw PreconditionError("coupling matrix does not match the spectrum");
  Vector rhs(n);
  for (int l = 0; l < n; ++l) rhs(l) = pseudo.at(l);
  auto r = linalg::solve(M, rhs);
  if (r.condition > 1e12) throw NumericError("coupling matrix is ill-conditioned");
  return {std::vector<double>(r.x.data(), r.x.data() + n), r.condition};
}

namespace {

double window_variance(const PowerSpectrum& spectrum, const SpectralWindow& w) {
  double s = 0.0;
  for (int l = w.lmin(); l <= w.lmax(); ++l) s += spectrum.sigma2(l) * w.at(l) * w.at(l);
  return s / kFourPi;
}

// Computes Pi_band(X * Wbar) exactly: the product is band-limited at
// field lmax + mask lmax, and only degrees <= out_lmax are kept.
class MaskedAnalysis {
 public:
  MaskedAnalysis(const WeightFunction& mask, int field_lmax, int out_lmax, int extra = 0)
      : out_lmax_(out_lmax) {
    int degree = std::max({field_lmax + mask.lmax() + out_lmax, 2 * out_lmax, extra});
    grid_ = build_grid((degree + 1) / 2);
    wbar_ = mask.complement().sample(grid_).values;
  }
  GridPtr grid() const { return grid_; }
  HarmonicCoefficients operator()(const HarmonicCoefficients& alm) const {
    SphereMap f = synthesize(alm, grid_);
    for (std::size_t k = 0; k < f.values.size(); ++k) f.values[k] *= wbar_[k];
    return analyze(f, out_lmax_);
  }

 private:
  int out_lmax_;
  GridPtr grid_;
  std::vector<double> wbar_;
};

std::vector<double> point_weights(const RingGrid& g) {
  std::vector<double> lam(g.size());
  for (const Ring& r : g.rings())
    for (int j = 0; j < r.n_phi; ++j) lam[r.offset + j] = g.ring_point_weight(r);
  return lam;
}

}  // namespace

SphereMap error_coefficients(const HarmonicCoefficients& alm, const WeightFunction& mask,
                             const SpectralWindow& window, GridPtr grid,
                             const PowerSpectrum& spectrum) {
  if (!grid || grid->exactness_degree() < 2 * window.lmax())
    throw PreconditionError("grid is not exact at twice the window lmax");
  double var = window_variance(spectrum, window);
  if (!(var > 0.0)) throw DomainError("error normalizer vanishes");
  MaskedAnalysis masked(mask, alm.lmax(), window.lmax());
  auto b = window.dense();
  SphereMap eps = synthesize(convolve_axisym(masked(alm), b), grid);
  double s = 1.0 / std::sqrt(var);
  for (double& v : eps.values) v *= s;
  return eps;
}

std::vector<double> MaskErrorCurve::standard_error() const {
  std::vector<double> se(alphas.size(), 0.0);
  const std::size_t n = realization.size();
  if (n < 2) return se;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    double ss = 0.0;
    for (const auto& r : realization) ss += (r[a] - values[a]) * (r[a] - values[a]);
    se[a] = std::sqrt(ss / (n - 1) / n);
  }
  return se;
}

MaskErrorCurve mask_error_curve(const MiseProblem& problem, const SpectralWindow& window,
                                const std::vector<double>& alphas, int n_mc, std::uint64_t seed) {
  if (n_mc < 1) throw PreconditionError("n_mc must be at least 1");
  GridPtr grid = build_grid(window.lmax());
  auto lam = point_weights(*grid);
  auto dmap = problem.weight.sample(grid).values;
  std::vector<double> u(grid->size());
  double usum = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) usum += u[k] = lam[k] * std::max(0.0, dmap[k]);
  if (!(usum > 0.0)) throw DomainError("reconstruction weight vanishes on the grid");

  double var = window_variance(problem.spectrum, window);
  if (!(var > 0.0)) throw DomainError("error normalizer vanishes");
  MaskedAnalysis masked(problem.mask, problem.spectrum.support(), window.lmax());
  auto b = window.dense();

  MaskErrorCurve out;
  out.alphas = alphas;
  out.values.assign(alphas.size(), 0.0);
  for (int i = 0; i < n_mc; ++i) {
    auto alm = simulate_field(problem.spectrum, seed, static_cast<std::uint64_t>(i));
    SphereMap eps = synthesize(convolve_axisym(masked(alm), b), grid);
    std::vector<double> row(alphas.size(), 0.0);
    for (std::size_t k = 0; k < u.size(); ++k) {
      double e = std::abs(eps.values[k]) / std::sqrt(var);
      for (std::size_t a = 0; a < alphas.size(); ++a)
        if (e <= alphas[a]) row[a] += u[k];
    }
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      row[a] /= usum;
      out.values[a] += row[a];
    }
    out.realization.push_back(std::move(row));
  }
  for (double& v : out.values) v /= n_mc;
  return out;
}

bool curves_cross(const MaskErrorCurve& a, const MaskErrorCurve& b, double nsigma) {
  if (a.alphas != b.alphas || a.realization.size() != b.realization.size())
    throw PreconditionError("curves were not computed on the same alphas and realizations");
  const std::size_t n = a.realization.size();
  if (n < 2) return false;
  bool above = false, below = false;
  for (std::size_t k = 0; k < a.alphas.size(); ++k) {
    double mean = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += a.realization[i][k] - b.realization[i][k];
    mean /= n;
    for (std::size_t i = 0; i < n; ++i) {
      double d = a.realization[i][k] - b.realization[i][k] - mean;
      ss += d * d;
    }
    double se = std::sqrt(ss / (n - 1) / n);
    if (mean > nsigma * se && mean > 0.0) above = true;
    if (mean < -nsigma * se && mean < 0.0) below = true;
  }
  return above && below;
}

// ---------------------------------------------------------------- Q

QMatrix q_matrix_axisym(const MiseProblem& problem) {
  problem.validate();
  if (!problem.mask.axisymmetric() || !problem.weight.axisymmetric())
    throw PreconditionError("analytic Q needs axisymmetric W and D; use q_matrix_mc");
  const int lmin = problem.lmin, lmax = problem.lmax, n = problem.size();
  const int LC = problem.spectrum.support();
  const WeightFunction wbar = problem.mask.complement();
  const int Lw = wbar.lmax();
  const int Ld = problem.weight.lmax();
  auto wb = [&](int l) { return l <= Lw ? wbar.multipoles()(l, 0).real() : 0.0; };
  auto dd = [&](int l) { return l <= Ld ? problem.weight.multipoles()(l, 0).real() : 0.0; };

  // Gaunt(l1, l2, l3; m, 0, m) summed against a zonal weight over l2
  auto zonal_gaunt_sum = [](int l1, int l3, int m, int L2, auto&& weight) {
    auto f0 = specfun::wigner3j_family(l1, l3, 0, 0);
    auto fm = specfun::wigner3j_family(l1, l3, m, -m);
    double s = 0.0;
    for (int l2 = f0.l1min; l2 <= std::min(f0.l1max, L2); ++l2) {
      double v = f0.at(l2);
      if (v == 0.0) continue;
      s += weight(l2) * std::sqrt(2.0 * l2 + 1) * v * fm.at(l2);
    }
    double sign = (m % 2) ? -1.0 : 1.0;
    return sign * std::sqrt((2.0 * l1 + 1) * (2.0 * l3 + 1) / kFourPi) * s;
  };

  Matrix Q = Matrix::Zero(n, n);
  for (int m = 0; m <= lmax; ++m) {
    // T[l - lmin][l1] for l >= m
    std::vector<std::vector<double>> T(n, std::vector<double>(LC + 1, 0.0));
    for (int l = std::max(lmin, m); l <= lmax; ++l)
      for (int l1 = std::max({m, l - Lw, 0}); l1 <= std::min(LC, l + Lw); ++l1)
        T[l - lmin][l1] = zonal_gaunt_sum(l1, l, m, Lw, wb);
    for (int l = std::max(lmin, m); l <= lmax; ++l)
      for (int lp = l; lp <= lmax; ++lp) {
        double A = 0.0;
        for (int l1 = 0; l1 <= LC; ++l1) A += problem.spectrum.at(l1) * T[l - lmin][l1] * T[lp - lmin][l1];
        if (A == 0.0) continue;
        double D = zonal_gaunt_sum(l, lp, m, Ld, dd);
        double v = (m == 0 ? 1.0 : 2.0) * A * D;
        Q(l - lmin, lp - lmin) += v;
        if (lp != l) Q(lp - lmin, l - lmin) += v;
      }
  }
  return {lmin, Q, std::nullopt};
}

QMatrix q_matrix_mc(const MiseProblem& problem, int n_mc, std::uint64_t seed) {
  problem.validate();
  if (n_mc < 2) throw PreconditionError("n_mc must be at least 2");
  const int lmin = problem.lmin, lmax = problem.lmax, n = problem.size();
  MaskedAnalysis masked(problem.mask, problem.spectrum.support(), lmax,
                        problem.weight.lmax() + 2 * lmax);
  GridPtr grid = masked.grid();
  auto lam = point_weights(*grid);
  auto dmap = problem.weight.sample(grid).values;
  const Eigen::Index npts = static_cast<Eigen::Index>(grid->size());
  Vector u(npts);
  for (Eigen::Index k = 0; k < npts; ++k) u(k) = lam[k] * dmap[k];

  Matrix mean = Matrix::Zero(n, n), m2 = Matrix::Zero(n, n), F(npts, n);
  for (int i = 0; i < n_mc; ++i) {
    auto abar = masked(simulate_field(problem.spectrum, seed, static_cast<std::uint64_t>(i)));
    for (int l = lmin; l <= lmax; ++l) {
      HarmonicCoefficients single(lmax);
      for (int m = 0; m <= l; ++m) single(l, m) = abar(l, m);
      SphereMap f = synthesize(single, grid);
      F.col(l - lmin) = Eigen::Map<const Vector>(f.values.data(), npts);
    }
    Matrix q = F.transpose() * u.asDiagonal() * F;
    // Welford update
    Matrix delta = q - mean;
    mean += delta / (i + 1);
    m2 += delta.cwiseProduct(q - mean);
  }
  Matrix se = (m2 / (n_mc - 1) / n_mc).cwiseSqrt();
  return {lmin, mean, se};
}

double mise_value(const QMatrix& Q, const PowerSpectrum& spectrum, const SpectralWindow& window) {
  if (window.lmin() < Q.lmin || window.lmax() > Q.lmax())
    throw PreconditionError("window band exceeds the Q band");
  const int n = static_cast<int>(Q.q.rows());
  Vector b(n);
  double den = 0.0;
  for (int i = 0; i < n; ++i) {
    int l = Q.lmin + i;
    b(i) = window.at(l);
    den += spectrum.sigma2(l) * b(i) * b(i);
  }
  if (!(den > 0.0)) throw DomainError("MISE denominator vanishes");
  return b.dot(Q.q * b) / den;
}

SpectralWindow mise_optimal_window(const QMatrix& Q, const PowerSpectrum& spectrum) {
  const int n = static_cast<int>(Q.q.rows());
  Vector sigma(n);
  for (int i = 0; i < n; ++i) {
    double s2 = spectrum.sigma2(Q.lmin + i);
    if (!(s2 > 0.0)) throw DomainError("sigma_l vanishes at l = " + std::to_string(Q.lmin + i));
    sigma(i) = std::sqrt(s2);
  }
  Matrix qd = Q.q.array() / (sigma * sigma.transpose()).array();
  auto ed = linalg::eig_symmetric(linalg::SymmetricMatrix::from_upper(qd));
  Vector b = ed.vectors.col(0).cwiseQuotient(sigma);
  b.normalize();
  if (b.sum() < 0.0) b = -b;
  return SpectralWindow(Q.lmin, Q.lmax(), std::vector<double>(b.data(), b.data() + n), "mise");
}

}  // namespace sphwin
