#pragma once

#include <complex>
#include <vector>

namespace sphwin::specfun {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kFourPi = 4.0 * kPi;

/// Degrees and orders of a triple product of spherical harmonics.
struct TripleIndex {
  int l1 = 0, l2 = 0, l3 = 0;
  int m1 = 0, m2 = 0, m3 = 0;
};

/// Legendre polynomial with P_l(1) = 1, by the three-term recursion.
/// Throws DomainError for |x| > 1 or l < 0.
double legendre_p(int l, double x);

/// Projection kernel (2l+1)/(4 pi) P_l(x).
double legendre_kernel(int l, double x);

/// P_0(x) .. P_lmax(x) in one pass.
std::vector<double> legendre_p_all(int lmax, double x);

/// Fully normalized associated Legendre functions for a fixed order m >= 0:
/// out[l - m] = sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!) P_lm(cos theta) for
/// l = m .. lmax, Condon-Shortley phase included, so that
/// Y_lm(theta, phi) = out[l - m] * exp(i m phi).
///
/// Uses an exponent-tracking recursion, so tiny values underflow to zero
/// instead of poisoning later terms; safe for lmax in the thousands.
void normalized_plm(int lmax, int m, double cos_theta, double sin_theta,
                    std::vector<double>& out);

/// Complex spherical harmonic Y_lm(theta, phi). Negative m follows
/// Y_{l,-m} = (-1)^m conj(Y_lm). Throws DomainError for |m| > l.
std::complex<double> spherical_harmonic(int l, int m, double theta,
                                        double phi);

/// Wigner 3j symbol (l1 l2 l3; m1 m2 m3). Zero when m1+m2+m3 != 0, the
/// triangle rule fails or |mi| > li. Racah's sum for small degrees, the
/// three-term recursion in l1 otherwise.
double wigner3j(const TripleIndex& t);

/// Racah single-sum formula with log-factorials and compensated summation.
double wigner3j_racah(const TripleIndex& t);

/// All symbols (l1 l2 l3; -m2-m3 m2 m3) for admissible l1, computed by the
/// Schulten-Gordon recursion from both ends of the range.
struct Wigner3jFamily {
  int l1min = 0;
  int l1max = -1;
  std::vector<double> values;  // values[l1 - l1min]

  double at(int l1) const {
    return (l1 < l1min || l1 > l1max) ? 0.0 : values[l1 - l1min];
  }
  bool empty() const { return l1max < l1min; }
};
Wigner3jFamily wigner3j_family(int l2, int l3, int m2, int m3);

/// Gaunt integral  int Y_{l1 m1} Y_{l2 m2} conj(Y_{l3 m3}) d xi.
/// Nonzero only for m1 + m2 = m3.
double gaunt(const TripleIndex& t);

/// Coefficient of L_{lpp} in the product L_l * L_lp of projection kernels.
double alpha_coupling(int l, int lp, int lpp);

}  // namespace sphwin::specfun
