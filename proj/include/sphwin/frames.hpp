#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sphwin/grid.hpp"
#include "sphwin/sht.hpp"

namespace sphwin {

/// Band-limited spectral window: coefficients b_l on [lmin, lmax], zero
/// elsewhere.
class SpectralWindow {
 public:
  SpectralWindow() = default;
  SpectralWindow(int lmin, int lmax, std::vector<double> coeffs, std::string kind = {},
                 bool nonnegative = false);

  int lmin() const { return lmin_; }
  int lmax() const { return lmax_; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  const std::string& kind() const { return kind_; }
  bool nonnegative() const { return nonnegative_; }

  double at(int l) const { return (l < lmin_ || l > lmax_) ? 0.0 : coeffs_[l - lmin_]; }
  /// b_0 .. b_lmax with explicit zeros below lmin.
  std::vector<double> dense() const;
  /// Copy with the band shrunk to the nonzero coefficients and clipped to
  /// [0, lmax_cap].
  SpectralWindow trimmed(std::optional<int> lmax_cap = std::nullopt) const;

 private:
  int lmin_ = 0;
  int lmax_ = 0;
  std::vector<double> coeffs_{0.0};
  std::string kind_;
  bool nonnegative_ = false;
};

struct Scale {
  int label = 0;
  SpectralWindow window;
};

/// Ordered set of windows plus the multipole range [lmin, lmax] the family is
/// meant to cover.
struct WindowFamily {
  std::vector<Scale> scales;
  int lmin = 0;
  int lmax = 0;

  /// Range defaults to the union of the window supports.
  static WindowFamily from_scales(std::vector<Scale> scales);
  int max_window_lmax() const;
  const Scale* find(int label) const;
};

/// First multipole of [family.lmin, family.lmax] with sum_j (b_l^j)^2 == 0.
std::optional<int> coverage_gap(const WindowFamily& family);

/// Ramp s: [0,1] -> [0,1] with s(0) = 0, s(1) = 1 used to build B-adic
/// profiles. Smoothstep of odd order M is C^{(M-1)/2}; Exponential is the
/// normalized primitive of exp(-1/(1-x^2)) and C^infinity.
enum class Ramp { Smoothstep, Exponential };

double ramp_value(Ramp ramp, int order, double t);

/// Profile supported on [1/B, B] with profile(x) + profile(x/B) = 1 on [1, B].
double badic_profile(double x, double B, Ramp ramp, int order);

/// h-windows {delta_0 (label -1), h^j (labels 0..jmax)} with h^j_l =
/// profile(l / B^j). The family range is [0, floor(B^jmax)], capped by
/// `lmax_cap`, which also clips every window.
WindowFamily spline_family(double B, int order, int jmax, Ramp ramp = Ramp::Exponential,
                           std::optional<int> lmax_cap = std::nullopt);

/// b_l = sqrt(h_l). Requires the window to be flagged nonnegative.
SpectralWindow sqrt_window(const SpectralWindow& h);
WindowFamily sqrt_family(const WindowFamily& h);

enum class ReferenceKind { Exponential, BSpline3, MexicanHat, SqrtSpline };

struct ReferenceSpec {
  ReferenceKind kind = ReferenceKind::BSpline3;
  int j = 9;             // scale index for the dilated kinds
  double B = 2.0;        // dilation base
  int order = 3;         // spline order for SqrtSpline
  Ramp ramp = Ramp::Exponential;
  double R = 6e-3;       // Mexican hat angular scale (radians)
  int lmax = 0;          // Mexican hat truncation; 0 picks ceil(10/R)
};

/// Primitive of exp(-1/(1-x^2)) on (-1,1), G(-1) = 0.
double bump_primitive(double y);
/// The cubic B-spline (|x-2|^3 - 4|x-1|^3 + 6|x|^3 - 4|x+1|^3 + |x+2|^3)/12.
double bspline3(double x);
/// Spatial Mexican hat (1 - 2 tan^2(theta/2)/R^2) exp(-2 tan^2(theta/2)/R^2).
double mexican_hat_profile(double theta, double R);

SpectralWindow reference_window(const ReferenceSpec& spec);

/// b~^j_l = b^j_l / sum_j' (b^j'_l)^2. Throws CoverageError naming the first
/// uncovered multipole of the family range.
WindowFamily dual_windows(const WindowFamily& family);

/// (min, max) over the family range of sum_j (b^j_l)^2.
std::pair<double, double> frame_bounds(const WindowFamily& family);

/// sqrt(lambda) * sum_l b_l L_l(t).
double needlet_profile(const SpectralWindow& window, double weight, double t);

struct NeedletCoefficients {
  int label = 0;
  GridPtr grid;
  std::vector<double> values;  // beta_k
};

/// beta_k = sqrt(lambda_k) * (Phi X)(xi_k), Phi X = sum_l b_l Pi_l X.
/// Requires grid exactness >= 2 * window.lmax().
NeedletCoefficients needlet_analyze(const HarmonicCoefficients& alm, const SpectralWindow& window,
                                    GridPtr grid, int label = 0);

/// X = sum_{j,k} beta^j_k psi~^j_k, evaluated in harmonic space: each scale's
/// beta / sqrt(lambda) is analyzed back to b^j_l a_lm, weighted by b~^j_l
/// and summed. Coefficients are matched to dual windows by label.
HarmonicCoefficients needlet_synthesize(const std::vector<NeedletCoefficients>& coeffs,
                                        const WindowFamily& duals);

enum class GridPolicy { Shared, PerScale };

/// needlet_analyze for every scale; Shared uses one grid at the largest
/// window lmax, PerScale the minimal exact grid of each window.
std::vector<NeedletCoefficients> needlet_analyze_family(const HarmonicCoefficients& alm,
                                                        const WindowFamily& family,
                                                        GridPolicy policy = GridPolicy::Shared);

/// Smoothing Psi = Phi~ Phi applied in harmonic space.
HarmonicCoefficients smooth(const HarmonicCoefficients& alm, const SpectralWindow& analysis,
                            const SpectralWindow& synthesis);

}  // namespace sphwin
