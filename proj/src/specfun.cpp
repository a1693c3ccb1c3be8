#include "sphwin/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <string>

#include "sphwin/errors.hpp"

namespace sphwin::specfun {
namespace {

constexpr int kRacahMaxDegree = 16;  // cancellation in the alternating sum grows past ~1e-13 beyond this
constexpr int kLogFactTableSize = 8192;

double log_factorial(int n) {
  static const std::vector<double> table = [] {
    std::vector<double> t(kLogFactTableSize);
    t[0] = 0.0;
    for (int i = 1; i < kLogFactTableSize; ++i) t[i] = t[i - 1] + std::log(double(i));
    return t;
  }();
  if (n < kLogFactTableSize) return table[n];
  return std::lgamma(double(n) + 1.0);
}

int parity_sign(int n) { return (n % 2 == 0) ? 1 : -1; }

// Neumaier's variant of Kahan summation.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      carry += (sum - t) + x;
    else
      carry += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

bool admissible(const TripleIndex& t) {
  if (t.l1 < 0 || t.l2 < 0 || t.l3 < 0) return false;
  if (std::abs(t.m1) > t.l1 || std::abs(t.m2) > t.l2 || std::abs(t.m3) > t.l3) return false;
  if (t.m1 + t.m2 + t.m3 != 0) return false;
  if (t.l3 < std::abs(t.l1 - t.l2) || t.l3 > t.l1 + t.l2) return false;
  return true;
}

// (l1 l2 l3; 0 0 0) in closed form; no cancellation.
double wigner3j_zero_m(int l1, int l2, int l3) {
  const int J = l1 + l2 + l3;
  if (J % 2 != 0) return 0.0;
  const int g = J / 2;
  const double log_mag = 0.5 * (log_factorial(J - 2 * l1) + log_factorial(J - 2 * l2) +
                                log_factorial(J - 2 * l3) - log_factorial(J + 1)) +
                         log_factorial(g) - log_factorial(g - l1) - log_factorial(g - l2) -
                         log_factorial(g - l3);
  return parity_sign(g) * std::exp(log_mag);
}

}  // namespace

double legendre_p(int l, double x) {
  if (l < 0) throw DomainError("legendre_p: negative degree");
  if (!(std::abs(x) <= 1.0)) throw DomainError("legendre_p: |x| > 1");
  if (l == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= l; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double legendre_kernel(int l, double x) {
  return (2.0 * l + 1.0) / kFourPi * legendre_p(l, x);
}

std::vector<double> legendre_p_all(int lmax, double x) {
  if (lmax < 0) return {};
  if (!(std::abs(x) <= 1.0)) throw DomainError("legendre_p_all: |x| > 1");
  std::vector<double> p(lmax + 1);
  p[0] = 1.0;
  if (lmax >= 1) p[1] = x;
  for (int k = 2; k <= lmax; ++k) p[k] = ((2.0 * k - 1.0) * x * p[k - 1] - (k - 1.0) * p[k - 2]) / k;
  return p;
}

void normalized_plm(int lmax, int m, double cos_theta, double sin_theta,
                    std::vector<double>& out) {
  constexpr int kExp = 600;
  const double big = std::ldexp(1.0, kExp);
  const double small = std::ldexp(1.0, -kExp);
  if (m < 0) throw DomainError("normalized_plm: negative order");
  if (m > lmax) {
    out.clear();
    return;
  }
  out.assign(lmax - m + 1, 0.0);

  double pmm = 1.0 / std::sqrt(kFourPi);
  int scale = 0;
  for (int k = 1; k <= m; ++k) {
    pmm *= -sin_theta * std::sqrt((2.0 * k + 1.0) / (2.0 * k));
    if (pmm != 0.0 && std::abs(pmm) < small) {
      pmm *= big;
      --scale;
    }
  }
  if (pmm == 0.0) return;

  auto emit = [&](int l, double v) { out[l - m] = scale == 0 ? v : std::ldexp(v, kExp * scale); };

  double prev = 0.0;  // l - 2
  double cur = pmm;   // l - 1
  double a_prev = 1.0;
  emit(m, cur);
  for (int l = m + 1; l <= lmax; ++l) {
    const double ll = double(l) * l, mm = double(m) * m;
    const double a = std::sqrt((4.0 * ll - 1.0) / (ll - mm));
    const double next = a * (cos_theta * cur - prev / a_prev);
    prev = cur;
    cur = next;
    a_prev = a;
    if (scale < 0 && std::abs(cur) > big) {
      cur *= small;
      prev *= small;
      ++scale;
    }
    emit(l, cur);
  }
}

std::complex<double> spherical_harmonic(int l, int m, double theta, double phi) {
  if (l < 0 || std::abs(m) > l) throw DomainError("spherical_harmonic: |m| > l");
  const int am = std::abs(m);
  std::vector<double> p;
  normalized_plm(l, am, std::cos(theta), std::sin(theta), p);
  const std::complex<double> y = p.back() * std::polar(1.0, am * phi);
  if (m >= 0) return y;
  return double(parity_sign(am)) * std::conj(y);
}

double wigner3j_racah(const TripleIndex& t) {
  if (!admissible(t)) return 0.0;
  const int j1 = t.l1, j2 = t.l2, j3 = t.l3;
  const int m1 = t.m1, m2 = t.m2, m3 = t.m3;
  const int kmin = std::max({0, j2 - j3 - m1, j1 - j3 + m2});
  const int kmax = std::min({j1 + j2 - j3, j1 - m1, j2 + m2});
  if (kmin > kmax) return 0.0;

  const double log_delta = log_factorial(j1 + j2 - j3) + log_factorial(j1 - j2 + j3) +
                           log_factorial(-j1 + j2 + j3) - log_factorial(j1 + j2 + j3 + 1);
  const double log_pref =
      0.5 * (log_delta + log_factorial(j1 + m1) + log_factorial(j1 - m1) + log_factorial(j2 + m2) +
             log_factorial(j2 - m2) + log_factorial(j3 + m3) + log_factorial(j3 - m3));

  CompensatedSum sum;
  for (int k = kmin; k <= kmax; ++k) {
    const double log_den = log_factorial(k) + log_factorial(j3 - j2 + k + m1) +
                           log_factorial(j3 - j1 + k - m2) + log_factorial(j1 + j2 - j3 - k) +
                           log_factorial(j1 - k - m1) + log_factorial(j2 - k + m2);
    sum.add(parity_sign(k) * std::exp(log_pref - log_den));
  }
  return parity_sign(j1 - j2 - m3) * sum.value();
}

Wigner3jFamily wigner3j_family(int l2, int l3, int m2, int m3) {
  Wigner3jFamily fam;
  if (l2 < 0 || l3 < 0 || std::abs(m2) > l2 || std::abs(m3) > l3) return fam;
  const int m1 = -m2 - m3;
  const int lo = std::max(std::abs(l2 - l3), std::abs(m1));
  const int hi = l2 + l3;
  if (lo > hi) return fam;
  fam.l1min = lo;
  fam.l1max = hi;
  const int n = hi - lo + 1;
  fam.values.assign(n, 0.0);
  std::vector<double>& f = fam.values;

  const double dl = double(l2 - l3);
  const double sl1 = double(l2 + l3 + 1);
  auto A = [&](int j) {
    const double jj = double(j) * j;
    const double v = (jj - dl * dl) * (sl1 * sl1 - jj) * (jj - double(m1) * m1);
    return v > 0.0 ? std::sqrt(v) : 0.0;
  };
  auto B = [&](int j) {
    return -(2.0 * j + 1.0) * (double(l2) * (l2 + 1) * m1 - double(l3) * (l3 + 1) * m1 -
                               double(j) * (j + 1) * (m3 - m2));
  };
  constexpr double kHuge = 1e100;

  if (n == 1) {
    f[0] = 1.0;
  } else {
    // Forward sweep from the bottom while magnitudes keep growing.
    int jmatch = lo;  // last index filled by the forward sweep
    if (lo > 0) {
      f[0] = 1.0;
      f[1] = -B(lo) * f[0] / (double(lo) * A(lo + 1));
      jmatch = lo + 1;
      double gprev = std::max(std::abs(f[0]), std::abs(f[1]));
      for (int j = lo + 1; j < hi; ++j) {
        const double next = -(B(j) * f[j - lo] + (j + 1.0) * A(j) * f[j - 1 - lo]) / (double(j) * A(j + 1));
        const double g = std::max(std::abs(next), std::abs(f[j - lo]));
        if (g < gprev) break;
        f[j + 1 - lo] = next;
        jmatch = j + 1;
        gprev = g;
        if (std::abs(next) > kHuge) {
          for (int k = 0; k <= j + 1 - lo; ++k) f[k] /= kHuge;
          gprev /= kHuge;
        }
      }
    }

    if (jmatch < hi) {
      // Backward sweep from the top down to an overlap of two points.
      const int stop = std::max(lo, jmatch - 1);
      std::vector<double> b(n, 0.0);
      b[n - 1] = 1.0;
      b[n - 2] = -B(hi) * b[n - 1] / ((hi + 1.0) * A(hi));
      for (int j = hi - 1; j - 1 >= stop; --j) {
        b[j - 1 - lo] = -(B(j) * b[j - lo] + double(j) * A(j + 1) * b[j + 1 - lo]) / ((j + 1.0) * A(j));
        if (std::abs(b[j - 1 - lo]) > kHuge)
          for (int k = j - 1 - lo; k < n; ++k) b[k] /= kHuge;
      }
      if (lo == 0 && jmatch == lo) {
        f = std::move(b);
      } else {
        double num = 0.0, den = 0.0;
        for (int j = stop; j <= jmatch; ++j) {
          num += f[j - lo] * b[j - lo];
          den += b[j - lo] * b[j - lo];
        }
        const double s = num / den;
        for (int j = jmatch + 1; j <= hi; ++j) f[j - lo] = s * b[j - lo];
      }
    }
  }

  CompensatedSum norm;
  for (int j = lo; j <= hi; ++j) norm.add((2.0 * j + 1.0) * f[j - lo] * f[j - lo]);
  double s = 1.0 / std::sqrt(norm.value());
  const int want = parity_sign(l2 - l3 - m1);
  if ((f[n - 1] < 0.0 ? -1 : 1) != want) s = -s;
  for (double& v : f) v *= s;
  return fam;
}

double wigner3j(const TripleIndex& t) {
  if (!admissible(t)) return 0.0;
  if (t.m1 == 0 && t.m2 == 0 && t.m3 == 0) return wigner3j_zero_m(t.l1, t.l2, t.l3);
  if (std::max({t.l1, t.l2, t.l3}) <= kRacahMaxDegree) return wigner3j_racah(t);
  return wigner3j_family(t.l2, t.l3, t.m2, t.m3).at(t.l1);
}

double gaunt(const TripleIndex& t) {
  if (t.m1 + t.m2 != t.m3) return 0.0;
  if (t.l1 < 0 || t.l2 < 0 || t.l3 < 0) return 0.0;
  if (std::abs(t.m1) > t.l1 || std::abs(t.m2) > t.l2 || std::abs(t.m3) > t.l3) return 0.0;
  const double w0 = wigner3j({t.l1, t.l2, t.l3, 0, 0, 0});
  if (w0 == 0.0) return 0.0;
  const double wm = wigner3j({t.l1, t.l2, t.l3, t.m1, t.m2, -t.m3});
  const double norm =
      std::sqrt((2.0 * t.l1 + 1.0) * (2.0 * t.l2 + 1.0) * (2.0 * t.l3 + 1.0) / kFourPi);
  return parity_sign(t.m3) * norm * w0 * wm;
}

double alpha_coupling(int l, int lp, int lpp) {
  if (l < 0 || lp < 0 || lpp < 0) return 0.0;
  const double w = wigner3j({l, lp, lpp, 0, 0, 0});
  return (2.0 * l + 1.0) * (2.0 * lp + 1.0) / kFourPi * w * w;
}

}  // namespace sphwin::specfun
