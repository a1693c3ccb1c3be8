#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "sphwin/grid.hpp"

namespace sphwin {

/// Multipoles a_lm of a band-limited field for 0 <= m <= l <= lmax.
/// Negative orders follow a_{l,-m} = (-1)^m conj(a_lm).
class HarmonicCoefficients {
 public:
  explicit HarmonicCoefficients(int lmax = 0, bool real_field = true);

  int lmax() const { return lmax_; }
  bool real_field() const { return real_; }
  std::size_t size() const { return data_.size(); }

  static std::size_t index(int l, int m) {
    return static_cast<std::size_t>(l) * (l + 1) / 2 + static_cast<std::size_t>(m);
  }

  std::complex<double>& operator()(int l, int m) { return data_[index(l, m)]; }
  const std::complex<double>& operator()(int l, int m) const { return data_[index(l, m)]; }

  /// Any order |m| <= l, zero beyond lmax.
  std::complex<double> at(int l, int m) const;

  std::vector<std::complex<double>>& data() { return data_; }
  const std::vector<std::complex<double>>& data() const { return data_; }

  /// Copy restricted (or zero-padded) to a new lmax.
  HarmonicCoefficients resized(int lmax) const;

  HarmonicCoefficients& operator+=(const HarmonicCoefficients& o);
  HarmonicCoefficients& operator*=(double s);

 private:
  int lmax_;
  bool real_;
  std::vector<std::complex<double>> data_;
};

/// Sum over all (l, m), m negative included, of a_lm conj(b_lm); real part.
double harmonic_inner(const HarmonicCoefficients& a, const HarmonicCoefficients& b);

/// Largest |a_lm - b_lm| over the common range (missing entries count as 0).
double max_abs_difference(const HarmonicCoefficients& a, const HarmonicCoefficients& b);

/// a_lm = sum_k lambda_k X(xi_k) conj(Y_lm(xi_k)): azimuthal sums per ring,
/// then weighted Legendre sums across rings. Requires grid exactness
/// >= 2*lmax (PreconditionError otherwise).
HarmonicCoefficients analyze(const SphereMap& map, int lmax);

/// X(xi_k) = sum_lm a_lm Y_lm(xi_k) on every grid point.
SphereMap synthesize(const HarmonicCoefficients& alm, GridPtr grid);

/// Field value at one point.
double evaluate(const HarmonicCoefficients& alm, double theta, double phi);

/// Coefficients zeroed outside degree l.
HarmonicCoefficients project(const HarmonicCoefficients& alm, int l);

/// h_l a_lm, with h treated as zero beyond its length.
HarmonicCoefficients convolve_axisym(const HarmonicCoefficients& alm, std::span<const double> h);

/// Kernel coefficients b_l (l = 0..lmax) of an axisymmetric profile,
/// profile(theta) = sum_l b_l L_l(cos theta):
///   b_l = 8 pi^2 / (2l+1) * int_{-1}^{1} profile(acos z) L_l(z) dz.
/// `nodes` Gauss-Legendre points are used (at least lmax+1; 0 picks 2*lmax+2).
std::vector<double> axisym_to_spectral(const std::function<double(double)>& profile, int lmax,
                                       int nodes = 0);

/// Inverse direction: sum_l b_l L_l(t).
double spectral_to_axisym(std::span<const double> b, double t);

}  // namespace sphwin
