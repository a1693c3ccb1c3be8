#include "sphwin/sht.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sphwin/errors.hpp"
#include "sphwin/specfun.hpp"

namespace sphwin {
namespace {

using cplx = std::complex<double>;

// Twiddle table exp(-2 pi i t / n), t = 0..n-1.
std::vector<cplx> twiddles(int n) {
  std::vector<cplx> w(n);
  for (int t = 0; t < n; ++t) w[t] = std::polar(1.0, -2.0 * specfun::kPi * t / n);
  return w;
}

void neumaier_add(double& sum, double& carry, double x) {
  const double t = sum + x;
  carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
  sum = t;
}

}  // namespace

HarmonicCoefficients::HarmonicCoefficients(int lmax, bool real_field)
    : lmax_(lmax), real_(real_field), data_(lmax < 0 ? 0 : index(lmax + 1, 0), cplx{}) {
  if (lmax < 0) throw DomainError("HarmonicCoefficients: negative lmax");
}

cplx HarmonicCoefficients::at(int l, int m) const {
  if (l < 0 || std::abs(m) > l) throw DomainError("HarmonicCoefficients::at: |m| > l");
  if (l > lmax_) return {};
  if (m >= 0) return data_[index(l, m)];
  const cplx a = std::conj(data_[index(l, -m)]);
  return (m % 2 == 0) ? a : -a;
}

HarmonicCoefficients HarmonicCoefficients::resized(int lmax) const {
  HarmonicCoefficients out(lmax, real_);
  const int lm = std::min(lmax, lmax_);
  std::copy_n(data_.begin(), index(lm + 1, 0), out.data_.begin());
  return out;
}

HarmonicCoefficients& HarmonicCoefficients::operator+=(const HarmonicCoefficients& o) {
  if (o.lmax_ > lmax_) *this = resized(o.lmax_);
  for (std::size_t i = 0; i < o.data_.size(); ++i) data_[i] += o.data_[i];
  real_ = real_ && o.real_;
  return *this;
}

HarmonicCoefficients& HarmonicCoefficients::operator*=(double s) {
  for (cplx& a : data_) a *= s;
  return *this;
}

double harmonic_inner(const HarmonicCoefficients& a, const HarmonicCoefficients& b) {
  const int lm = std::min(a.lmax(), b.lmax());
  double s = 0.0;
  for (int l = 0; l <= lm; ++l) {
    s += std::real(a(l, 0) * std::conj(b(l, 0)));
    for (int m = 1; m <= l; ++m) s += 2.0 * std::real(a(l, m) * std::conj(b(l, m)));
  }
  return s;
}

double max_abs_difference(const HarmonicCoefficients& a, const HarmonicCoefficients& b) {
  const int lm = std::max(a.lmax(), b.lmax());
  double d = 0.0;
  for (int l = 0; l <= lm; ++l)
    for (int m = 0; m <= l; ++m) d = std::max(d, std::abs(a.at(l, m) - b.at(l, m)));
  return d;
}

HarmonicCoefficients analyze(const SphereMap& map, int lmax) {
  if (!map.grid) throw PreconditionError("analyze: map has no grid");
  if (lmax < 0) throw DomainError("analyze: negative lmax");
  if (map.grid->exactness_degree() < 2 * lmax)
    throw PreconditionError("analyze: grid exactness degree " +
                            std::to_string(map.grid->exactness_degree()) + " < 2*lmax = " +
                            std::to_string(2 * lmax));
  HarmonicCoefficients alm(lmax, true);
  const std::size_t n = alm.size();
  std::vector<double> re(n, 0.0), im(n, 0.0), cre(n, 0.0), cim(n, 0.0);
  std::vector<cplx> fm(lmax + 1);
  std::vector<double> plm;

  int cached_nphi = -1;
  std::vector<cplx> tw;
  for (const Ring& r : map.grid->rings()) {
    if (r.n_phi != cached_nphi) {
      tw = twiddles(r.n_phi);
      cached_nphi = r.n_phi;
    }
    const double* x = map.values.data() + r.offset;
    for (int m = 0; m <= lmax; ++m) {
      cplx acc{};
      long idx = 0;
      for (int j = 0; j < r.n_phi; ++j) {
        acc += x[j] * tw[idx];
        idx += m;
        if (idx >= r.n_phi) idx %= r.n_phi;
      }
      fm[m] = acc * map.grid->ring_point_weight(r);
    }
    for (int m = 0; m <= lmax; ++m) {
      specfun::normalized_plm(lmax, m, r.cos_theta, r.sin_theta, plm);
      for (int l = m; l <= lmax; ++l) {
        const std::size_t i = HarmonicCoefficients::index(l, m);
        const cplx v = fm[m] * plm[l - m];
        neumaier_add(re[i], cre[i], v.real());
        neumaier_add(im[i], cim[i], v.imag());
      }
    }
  }
  for (int l = 0; l <= lmax; ++l) {
    alm(l, 0) = {re[HarmonicCoefficients::index(l, 0)] + cre[HarmonicCoefficients::index(l, 0)], 0.0};
    for (int m = 1; m <= l; ++m) {
      const std::size_t i = HarmonicCoefficients::index(l, m);
      alm(l, m) = {re[i] + cre[i], im[i] + cim[i]};
    }
  }
  return alm;
}

SphereMap synthesize(const HarmonicCoefficients& alm, GridPtr grid) {
  SphereMap out(grid);
  const int lmax = alm.lmax();
  std::vector<cplx> gm(lmax + 1);
  std::vector<double> plm;
  int cached_nphi = -1;
  std::vector<cplx> tw;
  for (const Ring& r : grid->rings()) {
    if (r.n_phi != cached_nphi) {
      tw = twiddles(r.n_phi);
      cached_nphi = r.n_phi;
    }
    for (int m = 0; m <= lmax; ++m) {
      specfun::normalized_plm(lmax, m, r.cos_theta, r.sin_theta, plm);
      cplx acc{};
      for (int l = m; l <= lmax; ++l) acc += alm(l, m) * plm[l - m];
      gm[m] = acc;
    }
    double* x = out.values.data() + r.offset;
    for (int j = 0; j < r.n_phi; ++j) {
      double v = gm[0].real();
      long idx = 0;
      for (int m = 1; m <= lmax; ++m) {
        idx += j;
        if (idx >= r.n_phi) idx %= r.n_phi;
        // exp(+i m phi_j) = conj(tw[m j mod n])
        v += 2.0 * std::real(gm[m] * std::conj(tw[idx]));
      }
      x[j] = v;
    }
  }
  return out;
}

double evaluate(const HarmonicCoefficients& alm, double theta, double phi) {
  const int lmax = alm.lmax();
  const double c = std::cos(theta), s = std::sin(theta);
  std::vector<double> plm;
  double v = 0.0;
  for (int m = 0; m <= lmax; ++m) {
    specfun::normalized_plm(lmax, m, c, s, plm);
    cplx acc{};
    for (int l = m; l <= lmax; ++l) acc += alm(l, m) * plm[l - m];
    v += (m == 0 ? 1.0 : 2.0) * std::real(acc * std::polar(1.0, m * phi));
  }
  return v;
}

HarmonicCoefficients project(const HarmonicCoefficients& alm, int l) {
  if (l < 0 || l > alm.lmax()) throw PreconditionError("project: degree outside the coefficient range");
  HarmonicCoefficients out(alm.lmax(), alm.real_field());
  for (int m = 0; m <= l; ++m) out(l, m) = alm(l, m);
  return out;
}

HarmonicCoefficients convolve_axisym(const HarmonicCoefficients& alm, std::span<const double> h) {
  HarmonicCoefficients out(alm.lmax(), alm.real_field());
  const int lm = std::min<int>(alm.lmax(), static_cast<int>(h.size()) - 1);
  for (int l = 0; l <= lm; ++l)
    for (int m = 0; m <= l; ++m) out(l, m) = h[l] * alm(l, m);
  return out;
}

std::vector<double> axisym_to_spectral(const std::function<double(double)>& profile, int lmax,
                                       int nodes) {
  if (lmax < 0) throw DomainError("axisym_to_spectral: negative lmax");
  if (nodes == 0) nodes = 2 * lmax + 2;
  if (nodes < lmax + 1) throw DomainError("axisym_to_spectral: need at least lmax+1 nodes");
  const QuadratureRule gl = gauss_legendre_rule(nodes);
  std::vector<double> b(lmax + 1, 0.0), carry(lmax + 1, 0.0);
  for (int i = 0; i < nodes; ++i) {
    const double z = gl.nodes[i];
    const double f = profile(std::acos(z)) * gl.weights[i];
    double p0 = 1.0, p1 = z;
    for (int l = 0; l <= lmax; ++l) {
      double p;
      if (l == 0) {
        p = 1.0;
      } else if (l == 1) {
        p = z;
      } else {
        p = ((2.0 * l - 1.0) * z * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p;
      }
      neumaier_add(b[l], carry[l], f * p);
    }
  }
  // b_l = 8 pi^2/(2l+1) * (2l+1)/(4 pi) * int f P_l = 2 pi int f P_l
  for (int l = 0; l <= lmax; ++l) b[l] = 2.0 * specfun::kPi * (b[l] + carry[l]);
  return b;
}

double spectral_to_axisym(std::span<const double> b, double t) {
  if (b.empty()) return 0.0;
  if (!(std::abs(t) <= 1.0)) throw DomainError("spectral_to_axisym: |t| > 1");
  double p0 = 1.0, p1 = t, s = b[0] * 1.0 / specfun::kFourPi;
  for (std::size_t l = 1; l < b.size(); ++l) {
    double p;
    if (l == 1) {
      p = t;
    } else {
      p = ((2.0 * l - 1.0) * t * p1 - (l - 1.0) * p0) / double(l);
      p0 = p1;
      p1 = p;
    }
    s += b[l] * (2.0 * l + 1.0) / specfun::kFourPi * p;
  }
  return s;
}

}  // namespace sphwin
