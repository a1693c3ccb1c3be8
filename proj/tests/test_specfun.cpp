#include <cmath>
#include <random>

#include <boost/multiprecision/cpp_int.hpp>

#include "doctest.h"
#include "sphwin/errors.hpp"
#include "sphwin/grid.hpp"
#include "sphwin/specfun.hpp"

using namespace sphwin;
using namespace sphwin::specfun;
using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

namespace {

cpp_int fact(int n) {
  cpp_int r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// Racah's formula in exact rationals: returns sign * sqrt(square).
double exact_3j(int j1, int j2, int j3, int m1, int m2, int m3) {
  if (m1 + m2 + m3 != 0 || j3 < std::abs(j1 - j2) || j3 > j1 + j2) return 0.0;
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m3) > j3) return 0.0;
  cpp_rational delta(fact(j1 + j2 - j3) * fact(j1 - j2 + j3) * fact(-j1 + j2 + j3),
                     fact(j1 + j2 + j3 + 1));
  cpp_int pre = fact(j1 + m1) * fact(j1 - m1) * fact(j2 + m2) * fact(j2 - m2) * fact(j3 + m3) *
                fact(j3 - m3);
  cpp_rational sum = 0;
  for (int k = 0; k <= j1 + j2 + j3; ++k) {
    int a[] = {k, j3 - j2 + k + m1, j3 - j1 + k - m2, j1 + j2 - j3 - k, j1 - k - m1, j2 - k + m2};
    bool ok = true;
    for (int v : a) ok = ok && v >= 0;
    if (!ok) continue;
    cpp_int den = 1;
    for (int v : a) den *= fact(v);
    cpp_rational term(1, den);
    sum += (k % 2) ? -term : term;
  }
  cpp_rational sq = delta * cpp_rational(pre) * sum * sum;
  int phase = ((j1 - j2 - m3) % 2 == 0) ? 1 : -1;
  double mag = std::sqrt(static_cast<double>(sq));
  return sum < 0 ? -phase * mag : phase * mag;
}

std::complex<double> y_closed(int l, int m, double th, double ph) {
  std::complex<double> e = std::polar(1.0, m * ph);
  double c = std::cos(th), s = std::sin(th);
  if (l == 1 && m == 1) return -std::sqrt(3 / (8 * kPi)) * s * e;
  if (l == 2 && m == 1) return -std::sqrt(15 / (8 * kPi)) * s * c * e;
  if (l == 2 && m == 2) return std::sqrt(15 / (32 * kPi)) * s * s * e;
  if (l == 3 && m == 0) return std::sqrt(7 / (16 * kPi)) * (5 * c * c * c - 3 * c);
  return 0.0;
}

}  // namespace

TEST_CASE("legendre polynomials") {
  CHECK(legendre_p(0, 0.3) == doctest::Approx(1.0));
  CHECK(legendre_p(1, -0.7) == doctest::Approx(-0.7));
  CHECK(legendre_p(2, 0.5) == doctest::Approx(-0.125));
  CHECK_THROWS_AS(legendre_p(3, 1.0000001), DomainError);
  CHECK_THROWS_AS(legendre_p(-1, 0.0), DomainError);
  for (int i = 0; i <= 100; ++i) {
    double x = -1.0 + 2.0 * i / 100;
    double x2 = x * x;
    double explicit_p[] = {1.0,
                           x,
                           (3 * x2 - 1) / 2,
                           (5 * x2 * x - 3 * x) / 2,
                           (35 * x2 * x2 - 30 * x2 + 3) / 8,
                           (63 * x2 * x2 * x - 70 * x2 * x + 15 * x) / 8,
                           (231 * x2 * x2 * x2 - 315 * x2 * x2 + 105 * x2 - 5) / 16};
    for (int l = 0; l <= 6; ++l) CHECK(std::abs(legendre_p(l, x) - explicit_p[l]) < 1e-13);
    // Bonnet recursion cross-check up to 10 via P_l' relation at the endpoints
    for (int l = 0; l <= 10; ++l) {
      auto all = legendre_p_all(10, x);
      CHECK(std::abs(all[l] - legendre_p(l, x)) < 1e-15);
    }
  }
  CHECK(legendre_p(10, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(legendre_p(9, -1.0) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("legendre kernel") {
  for (int l : {0, 3, 17}) CHECK(legendre_kernel(l, 1.0) == doctest::Approx((2 * l + 1) / kFourPi));
  CHECK(legendre_kernel(0, 0.37) == doctest::Approx(1 / kFourPi));
  auto q = gauss_legendre_rule(8);
  double s = 0.0;
  for (std::size_t k = 0; k < q.nodes.size(); ++k) s += q.weights[k] * std::pow(legendre_kernel(5, q.nodes[k]), 2);
  CHECK(s == doctest::Approx(11.0 / (8 * kPi * kPi)).epsilon(1e-14));
}

TEST_CASE("spherical harmonics") {
  CHECK(std::abs(spherical_harmonic(0, 0, 1.1, 2.0) - 1 / std::sqrt(kFourPi)) < 1e-15);
  CHECK(std::abs(spherical_harmonic(1, 0, 0.7, 2.0) - std::sqrt(3 / kFourPi) * std::cos(0.7)) < 1e-15);
  CHECK_THROWS_AS(spherical_harmonic(2, 3, 0.1, 0.1), DomainError);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < 20; ++i) {
    double th = std::acos(2 * U(rng) - 1), ph = 2 * kPi * U(rng);
    for (auto [l, m] : {std::pair{1, 1}, {2, 1}, {2, 2}, {3, 0}})
      CHECK(std::abs(spherical_harmonic(l, m, th, ph) - y_closed(l, m, th, ph)) < 1e-14);
    // negative order
    CHECK(std::abs(spherical_harmonic(2, -1, th, ph) + std::conj(y_closed(2, 1, th, ph))) < 1e-14);
    double s = 0.0;
    for (int m = -4; m <= 4; ++m) s += std::norm(spherical_harmonic(4, m, th, ph));
    CHECK(s == doctest::Approx(9 / kFourPi).epsilon(1e-13));
  }
}

TEST_CASE("addition theorem") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < 50; ++i) {
    double t1 = std::acos(2 * U(rng) - 1), p1 = 2 * kPi * U(rng);
    double t2 = std::acos(2 * U(rng) - 1), p2 = 2 * kPi * U(rng);
    double dot = std::sin(t1) * std::sin(t2) * std::cos(p1 - p2) + std::cos(t1) * std::cos(t2);
    for (int l : {0, 5, 17, 32}) {
      std::complex<double> s = 0.0;
      for (int m = -l; m <= l; ++m) s += std::conj(spherical_harmonic(l, m, t1, p1)) * spherical_harmonic(l, m, t2, p2);
      CHECK(std::abs(s - legendre_kernel(l, dot)) < 1e-11);
    }
  }
}

TEST_CASE("high degree harmonics stay finite and normalized") {
  std::vector<double> out;
  double th = 0.3;
  normalized_plm(2048, 1500, std::cos(th), std::sin(th), out);
  for (double v : out) CHECK(std::isfinite(v));
  // sum over m of |Y_lm|^2 at l = 2048 recovers (2l+1)/(4 pi)
  int l = 2048;
  double s = 0.0;
  for (int m = 0; m <= l; ++m) {
    normalized_plm(l, m, std::cos(th), std::sin(th), out);
    s += (m == 0 ? 1.0 : 2.0) * out[l - m] * out[l - m];
  }
  CHECK(s == doctest::Approx((2 * l + 1) / kFourPi).epsilon(1e-10));
}

TEST_CASE("wigner 3j: known values and exact oracle") {
  CHECK(wigner3j({0, 0, 0, 0, 0, 0}) == doctest::Approx(1.0));
  CHECK(wigner3j({1, 1, 3, 0, 0, 0}) == 0.0);
  CHECK(wigner3j({1, 1, 2, 0, 0, 0}) == doctest::Approx(std::sqrt(2.0 / 15)).epsilon(1e-15));
  CHECK(wigner3j({1, 1, 0, 0, 0, 0}) == doctest::Approx(-1 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(wigner3j({2, 2, 2, 1, 1, -1}) == 0.0);
  CHECK(wigner3j({2, 3, 4, 3, 0, -3}) == 0.0);  // |m1| > l1
  CHECK(exact_3j(1, 1, 2, 0, 0, 0) == doctest::Approx(std::sqrt(2.0 / 15)).epsilon(1e-15));

  for (int j1 = 0; j1 <= 9; ++j1)
    for (int j2 = 0; j2 <= 9; ++j2)
      for (int j3 = std::abs(j1 - j2); j3 <= j1 + j2; ++j3)
        for (int m1 = -j1; m1 <= j1; ++m1)
          for (int m2 = -j2; m2 <= j2; ++m2) {
            int m3 = -m1 - m2;
            if (std::abs(m3) > j3) continue;
            double ref = exact_3j(j1, j2, j3, m1, m2, m3);
            CHECK(std::abs(wigner3j_racah({j1, j2, j3, m1, m2, m3}) - ref) < 1e-14);
          }
  // upper end of the Racah range
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    int j1 = 8 + rng() % 9, j2 = 8 + rng() % 9;
    int j3 = std::abs(j1 - j2) + static_cast<int>(rng() % (j1 + j2 - std::abs(j1 - j2) + 1));
    int m1 = static_cast<int>(rng() % (2 * j1 + 1)) - j1;
    int lo = std::max(-j2, -j3 - m1), hi = std::min(j2, j3 - m1);
    if (lo > hi) continue;
    int m2 = lo + static_cast<int>(rng() % (hi - lo + 1));
    CHECK(std::abs(wigner3j_racah({j1, j2, j3, m1, m2, -m1 - m2}) - exact_3j(j1, j2, j3, m1, m2, -m1 - m2)) < 1e-13);
  }
}

TEST_CASE("wigner 3j: recursion agrees with Racah and with the exact oracle") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 300; ++i) {
    int l2 = rng() % 17, l3 = rng() % 17;
    int m2 = static_cast<int>(rng() % (2 * l2 + 1)) - l2;
    int m3 = static_cast<int>(rng() % (2 * l3 + 1)) - l3;
    auto f = wigner3j_family(l2, l3, m2, m3);
    for (int l1 = f.l1min; l1 <= std::min(f.l1max, 16); ++l1) {
      double r = wigner3j_racah({l1, l2, l3, -m2 - m3, m2, m3});
      CHECK(std::abs(f.at(l1) - r) < 1e-12);
    }
  }
  for (int i = 0; i < 30; ++i) {
    int l2 = 40 + rng() % 40, l3 = 40 + rng() % 40;
    int m2 = static_cast<int>(rng() % (2 * l2 + 1)) - l2;
    int m3 = static_cast<int>(rng() % (2 * l3 + 1)) - l3;
    auto f = wigner3j_family(l2, l3, m2, m3);
    for (int l1 = f.l1min; l1 <= f.l1max; l1 += 7)
      CHECK(std::abs(f.at(l1) - exact_3j(l1, l2, l3, -m2 - m3, m2, m3)) < 1e-14);
  }
  // public entry point above the Racah range
  CHECK(std::abs(wigner3j({70, 60, 50, 3, -5, 2}) - exact_3j(70, 60, 50, 3, -5, 2)) < 1e-13);
  CHECK(std::abs(wigner3j({100, 90, 80, 0, 0, 0}) - exact_3j(100, 90, 80, 0, 0, 0)) < 1e-13);
}

TEST_CASE("wigner 3j: orthogonality and large degrees") {
  for (int l3 = 0; l3 <= 20; ++l3)
    for (int l1 = 0; l1 <= 12; ++l1)
      for (int l2 = std::abs(l3 - l1); l2 <= std::min(12, l1 + l3); ++l2) {
        for (int m3 = -l3; m3 <= l3; ++m3) {
          double s = 0.0;
          for (int m1 = -l1; m1 <= l1; ++m1) {
            int m2 = -m1 - m3;
            if (std::abs(m2) > l2) continue;
            double v = wigner3j({l1, l2, l3, m1, m2, m3});
            s += (2 * l3 + 1) * v * v;
          }
          CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
      }
  auto f = wigner3j_family(900, 700, 13, -40);
  double s = 0.0;
  for (int l1 = f.l1min; l1 <= f.l1max; ++l1) s += (2 * l1 + 1) * f.at(l1) * f.at(l1);
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  for (double v : f.values) CHECK(std::isfinite(v));
}

TEST_CASE("gaunt integrals") {
  CHECK(gaunt({0, 0, 0, 0, 0, 0}) == doctest::Approx(1 / std::sqrt(kFourPi)));
  CHECK(gaunt({2, 3, 4, 1, 1, 0}) == 0.0);
  // quadrature of the triple product, exact on a degree-24 grid
  GridPtr g = build_grid(13);
  auto quad = [&](int l1, int l2, int l3, int m1, int m2, int m3) {
    std::complex<double> s = 0.0;
    for (std::size_t k = 0; k < g->size(); ++k) {
      auto p = g->point(k);
      s += p.weight * spherical_harmonic(l1, m1, p.theta, p.phi) * spherical_harmonic(l2, m2, p.theta, p.phi) *
           std::conj(spherical_harmonic(l3, m3, p.theta, p.phi));
    }
    return s;
  };
  auto q = quad(2, 3, 4, 1, -1, 0);
  CHECK(std::abs(q.imag()) < 1e-12);
  CHECK(std::abs(gaunt({2, 3, 4, 1, -1, 0}) - q.real()) < 1e-10);

  GridPtr h = build_grid(12);
  int checked = 0;
  for (int l1 = 0; l1 <= 8; ++l1)
    for (int l2 = 0; l2 <= 8; ++l2)
      for (int l3 = 0; l3 <= 8; ++l3)
        for (int m1 = -l1; m1 <= l1; m1 += 2)
          for (int m2 = -l2; m2 <= l2; m2 += 3) {
            int m3 = m1 + m2;
            if (std::abs(m3) > l3 || (l1 + l2 + l3) % 3) continue;
            std::complex<double> s = 0.0;
            for (const Ring& r : h->rings()) {
              for (int j = 0; j < r.n_phi; ++j) {
                double ph = h->phi(r, j);
                s += h->ring_point_weight(r) * spherical_harmonic(l1, m1, r.theta, ph) *
                     spherical_harmonic(l2, m2, r.theta, ph) * std::conj(spherical_harmonic(l3, m3, r.theta, ph));
              }
            }
            CHECK(std::abs(gaunt({l1, l2, l3, m1, m2, m3}) - s.real()) < 1e-10);
            ++checked;
          }
  CHECK(checked > 100);
}

TEST_CASE("legendre product coupling") {
  for (int l = 0; l <= 6; ++l)
    for (int lp = 0; lp <= 6; ++lp)
      CHECK(alpha_coupling(l, lp, 0) == doctest::Approx(l == lp ? (2 * l + 1) / kFourPi : 0.0));
  CHECK(alpha_coupling(0, 0, 0) == doctest::Approx(1 / kFourPi));
  // projection of L_2^2 onto L_l'' by 1-D quadrature: c = 8 pi^2/(2l''+1) int L_2^2 L_l''
  auto q = gauss_legendre_rule(10);
  for (int lpp : {0, 2, 4}) {
    double s = 0.0;
    for (std::size_t k = 0; k < q.nodes.size(); ++k)
      s += q.weights[k] * std::pow(legendre_kernel(2, q.nodes[k]), 2) * legendre_kernel(lpp, q.nodes[k]);
    CHECK(alpha_coupling(2, 2, lpp) == doctest::Approx(8 * kPi * kPi / (2 * lpp + 1) * s).epsilon(1e-13));
  }
  for (int l = 0; l <= 8; ++l)
    for (int lp = 0; lp <= 8; ++lp)
      for (int lpp = 0; lpp <= 16; ++lpp)
        if ((l + lp + lpp) % 2) CHECK(alpha_coupling(l, lp, lpp) == 0.0);
  // pointwise product identity
  for (double t : {-0.9, -0.2, 0.35, 0.8}) {
    double s = 0.0;
    for (int lpp = 0; lpp <= 13; ++lpp) s += alpha_coupling(6, 7, lpp) * legendre_kernel(lpp, t);
    CHECK(s == doctest::Approx(legendre_kernel(6, t) * legendre_kernel(7, t)).epsilon(1e-13));
  }
}
