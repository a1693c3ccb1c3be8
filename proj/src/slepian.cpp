#include "sphwin/slepian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "sphwin/errors.hpp"
#include "sphwin/grid.hpp"
#include "sphwin/specfun.hpp"

namespace sphwin {

using linalg::Matrix;
using linalg::SymmetricMatrix;
using linalg::Vector;
using specfun::kPi;

void ConcentrationProblem::validate() const {
  if (lmin < 0 || lmax < lmin) throw DomainError("band must satisfy 0 <= lmin <= lmax");
  if (!(theta0 > 0.0) || theta0 > kPi + 1e-12) throw DomainError("cap opening must lie in (0, pi]");
  if (a && !(*a >= 0.0)) throw DomainError("penalty weight must be nonnegative");
}

namespace {

void check_band(int lmin, int lmax, double theta0) {
  ConcentrationProblem{lmin, lmax, theta0, std::nullopt}.validate();
}

// rows: sqrt(w_k) * sqrt((2l+1)/2) P_l(z_k) for l in [lmin, lmax]
Matrix weighted_legendre(int lmin, int lmax, double a, double b) {
  QuadratureRule q = gauss_legendre_rule(lmax + 1, a, b);
  Matrix A(static_cast<Eigen::Index>(q.nodes.size()), lmax - lmin + 1);
  for (std::size_t k = 0; k < q.nodes.size(); ++k) {
    double z = q.nodes[k], sw = std::sqrt(q.weights[k]);
    double p0 = 1.0, p1 = z;
    for (int l = 0; l <= lmax; ++l) {
      double p;
      if (l == 0) p = 1.0;
      else if (l == 1) p = z;
      else {
        p = ((2 * l - 1) * z * p1 - (l - 1) * p0) / l;
        p0 = p1;
        p1 = p;
      }
      if (l >= lmin) A(static_cast<Eigen::Index>(k), l - lmin) = sw * std::sqrt(0.5 * (2 * l + 1)) * p;
    }
  }
  return A;
}

double window_energy(const SpectralWindow& w) {
  double e = 0.0;
  for (int l = w.lmin(); l <= w.lmax(); ++l) e += w.at(l) * w.at(l) * (2 * l + 1);
  return e / (4 * kPi);
}

// composite adaptive Gauss-Kronrod with panels finer than the oscillation scale
template <class F>
double theta_integral(F&& f, double a, double b, int lmax) {
  if (b <= a) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  double h = kPi / (2.0 * (lmax + 1));
  int panels = std::max(4, static_cast<int>(std::ceil((b - a) / h)));
  double step = (b - a) / panels, sum = 0.0;
  for (int i = 0; i < panels; ++i) {
    double lo = a + i * step, hi = (i + 1 == panels) ? b : lo + step;
    sum += gauss_kronrod<double, 31>::integrate(f, lo, hi, 6, 1e-12);
  }
  return sum;
}

// max of |psi| over [a, b]: dense scan then Brent refinement of the best sample
double profile_sup(const SpectralWindow& w, double a, double b) {
  auto mag = [&](double th) { return std::abs(window_profile(w, std::cos(th))); };
  double h = kPi / (8.0 * (w.lmax() + 1));
  int n = std::max(2, static_cast<int>(std::ceil((b - a) / h)));
  double step = (b - a) / n, best = -1.0;
  int arg = 0;
  for (int i = 0; i <= n; ++i) {
    double v = mag(a + i * step);
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  double lo = a + std::max(0, arg - 1) * step, hi = a + std::min(n, arg + 1) * step;
  auto r = boost::math::tools::brent_find_minima([&](double th) { return -mag(th); }, lo, hi, 52);
  return std::max(best, -r.second);
}

}  // namespace

SymmetricMatrix coupling_matrix(int lmin, int lmax, double theta0) {
  check_band(lmin, lmax, theta0);
  Matrix A = weighted_legendre(lmin, lmax, std::cos(theta0), 1.0);
  Matrix D = A.transpose() * A;
  return SymmetricMatrix::from_upper(D);
}

SymmetricMatrix complement_matrix(int lmin, int lmax, double theta0) {
  check_band(lmin, lmax, theta0);
  Matrix A = weighted_legendre(lmin, lmax, -1.0, std::cos(theta0));
  Matrix C = A.transpose() * A;
  return SymmetricMatrix::from_upper(C);
}

SymmetricMatrix second_difference_gram(int n) {
  if (n < 1) throw DomainError("second difference needs at least one coefficient");
  Matrix H = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    H(i, i) = -2.0;
    if (i > 0) H(i, i - 1) = 1.0;
    if (i + 1 < n) H(i, i + 1) = 1.0;
  }
  Matrix G = H.transpose() * H;
  return SymmetricMatrix::from_upper(G);
}

Vector to_bar(const SpectralWindow& w, int lmin, int lmax) {
  if (w.lmin() < lmin || w.lmax() > lmax) throw PreconditionError("window band exceeds the matrix band");
  Vector v(lmax - lmin + 1);
  for (int l = lmin; l <= lmax; ++l) v(l - lmin) = std::sqrt((2 * l + 1) / (8 * kPi * kPi)) * w.at(l);
  return v;
}

SpectralWindow from_bar(const Vector& bbar, int lmin, std::string kind) {
  std::vector<double> c(static_cast<std::size_t>(bbar.size()));
  for (Eigen::Index i = 0; i < bbar.size(); ++i) {
    int l = lmin + static_cast<int>(i);
    c[i] = bbar(i) / std::sqrt((2 * l + 1) / (8 * kPi * kPi));
  }
  return SpectralWindow(lmin, lmin + static_cast<int>(bbar.size()) - 1, std::move(c), std::move(kind));
}

double window_profile(const SpectralWindow& w, double z) {
  double p0 = 1.0, p1 = z, sum = w.at(0);
  if (w.lmax() >= 1) sum += w.at(1) * 3.0 * z;
  for (int l = 2; l <= w.lmax(); ++l) {
    double p = ((2 * l - 1) * z * p1 - (l - 1) * p0) / l;
    p0 = p1;
    p1 = p;
    if (l >= w.lmin()) sum += w.at(l) * (2 * l + 1) * p;
  }
  return sum / (4 * kPi);
}

double concentration(const SpectralWindow& w, double theta0) {
  double total = window_energy(w);
  if (!(total > 0.0)) throw DomainError("concentration of a zero window");
  if (!(theta0 > 0.0)) throw DomainError("cap opening must be positive");
  if (theta0 >= kPi) return 0.0;
  QuadratureRule q = gauss_legendre_rule(w.lmax() + 1, -1.0, std::cos(theta0));
  double out = 0.0;
  for (std::size_t k = 0; k < q.nodes.size(); ++k) {
    double v = window_profile(w, q.nodes[k]);
    out += q.weights[k] * v * v;
  }
  return 2 * kPi * out / total;
}

double concentration_matrix_form(const SpectralWindow& w, const SymmetricMatrix& D, int lmin,
                                 int lmax) {
  if (D.order() != lmax - lmin + 1) throw PreconditionError("matrix order does not match band");
  Vector b = to_bar(w, lmin, lmax);
  double n2 = b.squaredNorm();
  if (!(n2 > 0.0)) throw DomainError("concentration of a zero window");
  return 1.0 - b.dot(D.dense() * b) / n2;
}

SlepianDesign design_slepian(const ConcentrationProblem& problem) {
  problem.validate();
  const int n = problem.size();
  SymmetricMatrix C = complement_matrix(problem.lmin, problem.lmax, problem.theta0);
  SymmetricMatrix G = second_difference_gram(n);
  const double eps = std::numeric_limits<double>::epsilon();

  auto solve_with = [&](double a) {
    SymmetricMatrix M = C + a * G;
    return std::pair{M, linalg::eig_symmetric(M)};
  };

  double a = 0.0;
  std::pair<SymmetricMatrix, linalg::EigenDecomposition> sol;
  if (problem.a) {
    a = *problem.a;
    sol = solve_with(a);
  } else {
    double dnorm = (Matrix::Identity(n, n) - C.dense()).norm();
    if (!(dnorm > 0.0)) dnorm = 1.0;
    for (int k = -16; k <= -2; ++k) {
      a = std::pow(10.0, k) * dnorm;
      sol = solve_with(a);
      const Vector& v = sol.second.values;
      if (n == 1) break;
      double scale = std::max(std::abs(v(0)), std::abs(v(n - 1)));
      if (v(1) - v(0) > 1e3 * eps * std::max(scale, 1.0)) break;
    }
  }

  const auto& [M, ed] = sol;
  const Vector& vals = ed.values;
  double scale = std::max({std::abs(vals(0)), std::abs(vals(n - 1)), 1.0});
  int cluster = 1;
  while (cluster < n && vals(cluster) - vals(0) <= 1e3 * eps * scale) ++cluster;

  Vector b;
  if (cluster == 1) {
    b = ed.vectors.col(0);
  } else {
    // smoothest member of the degenerate eigenspace
    Matrix V = ed.vectors.leftCols(cluster);
    Matrix R = V.transpose() * G.dense() * V;
    Eigen::SelfAdjointEigenSolver<Matrix> es(R);
    if (es.info() != Eigen::Success) throw NumericError("eigen-solver did not converge");
    b = V * es.eigenvectors().col(0);
  }
  b.normalize();

  SpectralWindow w = from_bar(b, problem.lmin, "slepian");
  double s = 0.0;
  for (double c : w.coeffs()) s += c;
  if (s < 0.0 || (s == 0.0 && b(0) < 0.0)) {
    b = -b;
    w = from_bar(b, problem.lmin, "slepian");
  }
  return {w, a, vals(0)};
}

SpectralWindow slepian_window(const ConcentrationProblem& problem) {
  return design_slepian(problem).window;
}

double shannon_number(const SymmetricMatrix& D) { return D.trace(); }

double lp_concentration(const SpectralWindow& w, double theta0, double p) {
  if (!(window_energy(w) > 0.0)) throw DomainError("concentration of a zero window");
  if (!(theta0 > 0.0)) throw DomainError("cap opening must be positive");
  if (theta0 >= kPi) return 0.0;
  if (std::isinf(p) && p > 0) {
    double outside = profile_sup(w, theta0, kPi);
    double inside = profile_sup(w, 0.0, theta0);
    return outside / std::max(outside, inside);
  }
  if (p != 1.0 && p != 2.0) throw DomainError("p must be 1, 2 or infinity");
  auto f = [&](double th) {
    double v = std::abs(window_profile(w, std::cos(th)));
    return (p == 1.0 ? v : v * v) * std::sin(th);
  };
  double outside = theta_integral(f, theta0, kPi, w.lmax());
  double inside = theta_integral(f, 0.0, theta0, w.lmax());
  return outside / (inside + outside);
}

Uncertainty uncertainty(const SpectralWindow& w) {
  double norm2 = window_energy(w);
  if (!(norm2 > 0.0)) throw DomainError("uncertainty of a zero window");
  Uncertainty u;
  double dl = 0.0;
  for (int l = w.lmin(); l <= w.lmax(); ++l) {
    double c2 = w.at(l) * w.at(l) * (2 * l + 1) / (4 * kPi) / norm2;
    dl += static_cast<double>(l) * (l + 1) * c2;
  }
  u.delta_l = std::sqrt(dl);

  // first moment of psi^2 along the pole; degree 2 lmax + 1 needs lmax + 1 nodes
  QuadratureRule q = gauss_legendre_rule(w.lmax() + 1);
  double mom = 0.0;
  for (std::size_t k = 0; k < q.nodes.size(); ++k) {
    double v = window_profile(w, q.nodes[k]);
    mom += q.weights[k] * q.nodes[k] * v * v;
  }
  double m = std::abs(2 * kPi * mom / norm2);
  if (!(m > 1e-14)) throw DomainError("vanishing spatial moment");
  m = std::min(m, 1.0);
  u.delta_xi = std::sqrt(1.0 - m * m) / m;
  return u;
}

double uncertainty_product(const SpectralWindow& w) { return uncertainty(w).product(); }

}  // namespace sphwin
