#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "sphwin/frames.hpp"
#include "sphwin/grid.hpp"
#include "sphwin/linalg.hpp"
#include "sphwin/sht.hpp"

namespace sphwin {

/// C_l >= 0 for 0 <= l <= lmax.
class PowerSpectrum {
 public:
  PowerSpectrum() : c_{0.0} {}
  explicit PowerSpectrum(std::vector<double> c);

  int lmax() const { return static_cast<int>(c_.size()) - 1; }
  /// Largest l with C_l > 0 (0 for the zero spectrum).
  int support() const;
  double at(int l) const { return (l < 0 || l > lmax()) ? 0.0 : c_[l]; }
  /// sigma_l^2 = (2l+1) C_l.
  double sigma2(int l) const { return (2 * l + 1) * at(l); }
  const std::vector<double>& values() const { return c_; }

 private:
  std::vector<double> c_;
};

/// Generator for stream `stream` of a run seeded by `seed`; streams are
/// independent of each other and of the order they are drawn in.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream);

/// Uniform direction on the unit sphere of R^n.
linalg::Vector random_unit_vector(int n, std::mt19937_64& rng);

/// Zonal band [theta_start, theta_end] (degrees) where the weight takes `value`.
struct CapInterval {
  double theta_start = 0.0;
  double theta_end = 0.0;
  double value = 0.0;
};

/// Mask or reconstruction weight on the sphere, held through its multipoles
/// up to lmax. Every map-space use goes through the band-limited synthesis,
/// so the analytic and Monte-Carlo paths see the same function.
class WeightFunction {
 public:
  /// W = 1 away from the intervals, `value` inside them, with a cosine-arch
  /// junction of width apod_deg on the outer side of every interval.
  static WeightFunction axisymmetric(std::vector<CapInterval> intervals, double apod_deg, int lmax);
  /// Constant weight (lmax 0).
  static WeightFunction constant(double value);
  /// Multipoles of a sampled map; the grid must be exact at 2*lmax.
  static WeightFunction from_map(const SphereMap& map, int lmax);
  static WeightFunction from_multipoles(HarmonicCoefficients w, bool axisymmetric);

  bool axisymmetric() const { return axisym_; }
  int lmax() const { return w_.lmax(); }
  const HarmonicCoefficients& multipoles() const { return w_; }

  /// Raw profile for axisymmetric weights built from intervals.
  double profile(double theta) const;
  SphereMap sample(GridPtr grid) const;
  /// 1 - W.
  WeightFunction complement() const;
  /// C^W_l = (2l+1)^-1 sum_m |w_lm|^2.
  std::vector<double> pseudo_spectrum() const;

 private:
  HarmonicCoefficients w_{0};
  bool axisym_ = true;
  std::function<double(double)> profile_;
};

struct MiseProblem {
  int lmin = 0;
  int lmax = 0;
  PowerSpectrum spectrum;
  WeightFunction mask;    // W
  WeightFunction weight;  // D

  /// D defaults to W.
  static MiseProblem make(int lmin, int lmax, PowerSpectrum spectrum, WeightFunction mask,
                          std::optional<WeightFunction> weight = std::nullopt);
  void validate() const;
  int size() const { return lmax - lmin + 1; }
};

/// Gaussian isotropic realization: a_l0 ~ N(0, C_l), Re/Im of a_lm (m > 0)
/// ~ N(0, C_l / 2). Deterministic in (seed, stream).
HarmonicCoefficients simulate_field(const PowerSpectrum& spectrum, std::uint64_t seed,
                                    std::uint64_t stream = 0);

/// (2l+1)^-1 sum_{m=-l}^{l} |a_lm|^2.
PowerSpectrum pseudo_spectrum(const HarmonicCoefficients& alm);

/// M_ll' = sum_l'' alpha_{l l' l''} (2l''+1)/(2l+1) C^W_l'', 0 <= l, l' <= lmax.
linalg::Matrix coupling_matrix_master(const WeightFunction& mask, int lmax);

struct SpectrumEstimate {
  std::vector<double> values;  // may be negative for noisy input
  double condition = 0.0;
};

/// Solves M x = pseudo. Condition numbers above 1e12 raise NumericError.
SpectrumEstimate unbiased_spectrum(const PowerSpectrum& pseudo, const linalg::Matrix& M);

/// Normalized error field eps = Phi(X (1 - W)) / sqrt((4 pi)^-1 sum sigma_l^2 b_l^2)
/// on `grid`, which must be exact at 2 * window.lmax().
SphereMap error_coefficients(const HarmonicCoefficients& alm, const WeightFunction& mask,
                             const SpectralWindow& window, GridPtr grid,
                             const PowerSpectrum& spectrum);

struct MaskErrorCurve {
  std::vector<double> alphas;
  std::vector<double> values;                    // E_b(alpha)
  std::vector<std::vector<double>> realization;  // [i][alpha] weighted fraction in realization i
  std::vector<double> standard_error() const;
};

/// E_b(alpha) = sum_k D_k lambda_k P(|eps_k| <= alpha) / sum_k D_k lambda_k, with the
/// probabilities estimated over n_mc realizations on the minimal grid of
/// the window. D is clamped at zero.
MaskErrorCurve mask_error_curve(const MiseProblem& problem, const SpectralWindow& window,
                                const std::vector<double>& alphas, int n_mc, std::uint64_t seed);

/// True if a is significantly above b at some alpha and significantly below
/// at another (paired differences beyond `nsigma` standard errors).
bool curves_cross(const MaskErrorCurve& a, const MaskErrorCurve& b, double nsigma = 3.0);

/// Q over the band, indices l - lmin; `se` is filled by Monte-Carlo estimates.
struct QMatrix {
  int lmin = 0;
  linalg::Matrix q;
  std::optional<linalg::Matrix> se;
  int lmax() const { return lmin + static_cast<int>(q.rows()) - 1; }
};

/// Analytic Q for axisymmetric W and D from Gaunt coefficients.
QMatrix q_matrix_axisym(const MiseProblem& problem);

/// Moment estimator of Q = E int D Phi_l(X Wbar) Phi_l'(X Wbar) over n_mc
/// realizations (works for any W, D).
QMatrix q_matrix_mc(const MiseProblem& problem, int n_mc, std::uint64_t seed);

/// R(b) = b^T Q b / sum sigma_l^2 b_l^2.
double mise_value(const QMatrix& Q, const PowerSpectrum& spectrum, const SpectralWindow& window);

/// Minimizer of R over the band: lowest eigenvector of Q_ll' / (sigma_l sigma_l'),
/// divided by sigma, unit-normalized, sum b_l >= 0.
SpectralWindow mise_optimal_window(const QMatrix& Q, const PowerSpectrum& spectrum);

}  // namespace sphwin
