#pragma once

#include <optional>
#include <vector>

#include "sphwin/frames.hpp"
#include "sphwin/linalg.hpp"

namespace sphwin {

/// Polar cap of opening theta0 (radians) and a multipole band. `a` is the
/// curvature penalty weight; nullopt selects it by the sweep rule.
struct ConcentrationProblem {
  int lmin = 0;
  int lmax = 0;
  double theta0 = 0.0;
  std::optional<double> a;

  void validate() const;
  int size() const { return lmax - lmin + 1; }
};

/// D_ll' = 8 pi^2 / sqrt((2l+1)(2l'+1)) int_{cos theta0}^1 L_l L_l' dz, indices
/// l - lmin. Eigenvalues lie in [0, 1]; theta0 = pi gives the identity.
linalg::SymmetricMatrix coupling_matrix(int lmin, int lmax, double theta0);

/// I - D, assembled from the integral over [-1, cos theta0] so that tiny
/// leakages keep their relative precision.
linalg::SymmetricMatrix complement_matrix(int lmin, int lmax, double theta0);

/// H^T H for the second-difference operator on n coefficients, with zeros
/// implied one slot beyond each end.
linalg::SymmetricMatrix second_difference_gram(int n);

/// bbar_l = sqrt((2l+1) / (8 pi^2)) b_l on [lmin, lmax].
linalg::Vector to_bar(const SpectralWindow& w, int lmin, int lmax);
SpectralWindow from_bar(const linalg::Vector& bbar, int lmin, std::string kind = {});

/// Axisymmetric profile psi(z) = sum_l b_l L_l(z).
double window_profile(const SpectralWindow& w, double z);

/// Fraction of the energy of psi outside the cap, int_{S\cap} psi^2 / int_S psi^2,
/// by Gauss-Legendre in z (exact for the polynomial integrand).
double concentration(const SpectralWindow& w, double theta0);

/// Same criterion as the Rayleigh quotient 1 - bbar^T D bbar / |bbar|^2.
double concentration_matrix_form(const SpectralWindow& w, const linalg::SymmetricMatrix& D,
                                 int lmin, int lmax);

struct SlepianDesign {
  SpectralWindow window;  // |bbar| = 1, sum b_l > 0
  double a = 0.0;         // penalty weight actually used
  double eigenvalue = 0.0;  // of I - D + a H^T H
};

/// Minimizes bbar^T (I - D + a H^T H) bbar over unit bbar, i.e. maximizes
/// the concentration with a curvature penalty. With a = 0 and a degenerate
/// minimum, the smoothest vector (least |H bbar|) of the cluster is chosen.
SlepianDesign design_slepian(const ConcentrationProblem& problem);
SpectralWindow slepian_window(const ConcentrationProblem& problem);

/// tr D.
double shannon_number(const linalg::SymmetricMatrix& D);

/// 1 - |psi 1_cap|_p^p / |psi|_p^p for p in {1, 2, inf}, evaluated as the
/// outside part over the total by adaptive quadrature in theta. For p = inf
/// the ratio is sup_{theta >= theta0} |psi| / sup |psi|.
double lp_concentration(const SpectralWindow& w, double theta0, double p);

struct Uncertainty {
  double delta_xi = 0.0;
  double delta_l = 0.0;
  double product() const { return delta_xi * delta_l; }
};

/// Delta_xi = sqrt(1 - m^2) / m with m = |int xi psi^2| / int psi^2, and
/// Delta_L = sqrt(sum l(l+1) c_l^2) over the orthonormal coefficients
/// c_l ~ b_l sqrt((2l+1)/4pi) scaled to unit norm.
Uncertainty uncertainty(const SpectralWindow& w);
double uncertainty_product(const SpectralWindow& w);

}  // namespace sphwin
