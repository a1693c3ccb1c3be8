#include "sphwin/grid.hpp"

#include <cmath>
#include <string>

#include "sphwin/errors.hpp"
#include "sphwin/specfun.hpp"

namespace sphwin {
namespace {

constexpr double kNewtonTol = 1e-15;
constexpr int kNewtonMaxIter = 100;

// P_n(x) and P_n'(x) by the three-term recursion, |x| < 1.
void legendre_with_derivative(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

QuadratureRule gauss_legendre_rule(int n) {
  if (n < 1) throw DomainError("gauss_legendre_rule: need at least one node");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // i-th largest root
    double x = std::cos(specfun::kPi * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 0.0;
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      legendre_with_derivative(n, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) <= kNewtonTol) break;
    }
    legendre_with_derivative(n, x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
    rule.nodes[i] = -x;
    rule.weights[i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadratureRule gauss_legendre_rule(int n, double a, double b) {
  QuadratureRule r = gauss_legendre_rule(n);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = mid + half * r.nodes[i];
    r.weights[i] *= half;
  }
  return r;
}

RingGrid::RingGrid(int lmax, std::vector<Ring> rings, int exactness_degree)
    : lmax_(lmax), exactness_(exactness_degree), rings_(std::move(rings)) {
  std::size_t off = 0;
  for (Ring& r : rings_) {
    if (r.n_phi < 1 || !(r.weight > 0.0)) throw PreconditionError("RingGrid: invalid ring");
    r.offset = off;
    off += static_cast<std::size_t>(r.n_phi);
  }
  size_ = off;
}

std::shared_ptr<const RingGrid> RingGrid::build(int lmax) {
  if (lmax < 0) throw DomainError("build_grid: negative lmax");
  const QuadratureRule gl = gauss_legendre_rule(lmax + 1);
  std::vector<Ring> rings(lmax + 1);
  // North to south: decreasing cos(theta).
  for (int i = 0; i <= lmax; ++i) {
    const int src = lmax - i;
    Ring& r = rings[i];
    r.cos_theta = gl.nodes[src];
    r.sin_theta = std::sqrt((1.0 - r.cos_theta) * (1.0 + r.cos_theta));
    r.theta = std::acos(r.cos_theta);
    r.weight = gl.weights[src];
    r.n_phi = 2 * lmax + 1;
  }
  return std::make_shared<const RingGrid>(lmax, std::move(rings), 2 * lmax);
}

double RingGrid::phi(const Ring& ring, int j) const {
  return 2.0 * specfun::kPi * j / ring.n_phi;
}

double RingGrid::ring_point_weight(const Ring& ring) const {
  return ring.weight * 2.0 * specfun::kPi / ring.n_phi;
}

GridPoint RingGrid::point(std::size_t k) const {
  if (k >= size_) throw PreconditionError("RingGrid::point: index out of range");
  // Rings are few; a linear scan keeps this simple.
  for (const Ring& r : rings_) {
    if (k < r.offset + static_cast<std::size_t>(r.n_phi)) {
      const int j = static_cast<int>(k - r.offset);
      return {r.theta, phi(r, j), ring_point_weight(r)};
    }
  }
  return {};
}

GridPtr build_grid(int lmax) { return RingGrid::build(lmax); }

SphereMap::SphereMap(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (!grid || values.size() != grid->size())
    throw PreconditionError("SphereMap: value count does not match grid size");
}

double integrate(const SphereMap& map) {
  double sum = 0.0, carry = 0.0;
  for (const Ring& r : map.grid->rings()) {
    double ring_sum = 0.0;
    for (int j = 0; j < r.n_phi; ++j) ring_sum += map.values[r.offset + j];
    const double x = ring_sum * map.grid->ring_point_weight(r);
    const double t = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + carry;
}

}  // namespace sphwin
