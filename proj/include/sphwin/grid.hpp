#pragma once

#include <cstddef>
#include <memory>
#include <vector>

namespace sphwin {

struct QuadratureRule {
  std::vector<double> nodes;    // strictly increasing
  std::vector<double> weights;  // positive
};

/// n-point Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree
/// 2n - 1. Newton refinement from Chebyshev-type starting points.
QuadratureRule gauss_legendre_rule(int n);

/// Same rule mapped affinely onto [a, b].
QuadratureRule gauss_legendre_rule(int n, double a, double b);

/// Iso-latitude ring with equispaced longitudes starting at phi = 0.
struct Ring {
  double theta = 0.0;
  double cos_theta = 1.0;
  double sin_theta = 0.0;
  double weight = 0.0;  // Gauss-Legendre weight in cos(theta)
  int n_phi = 1;
  std::size_t offset = 0;  // flat index of the first point
};

struct GridPoint {
  double theta = 0.0;
  double phi = 0.0;
  double weight = 0.0;
};

/// Positive-weight quadrature on the sphere: Gauss-Legendre rings in
/// cos(theta) times equispaced longitudes. Immutable once built.
class RingGrid {
 public:
  RingGrid(int lmax, std::vector<Ring> rings, int exactness_degree);

  /// Minimal grid exact at degree 2*lmax: lmax+1 rings of 2*lmax+1 points.
  static std::shared_ptr<const RingGrid> build(int lmax);

  int lmax() const { return lmax_; }
  int exactness_degree() const { return exactness_; }
  const std::vector<Ring>& rings() const { return rings_; }
  std::size_t size() const { return size_; }

  /// Flat index k -> (xi_k, lambda_k).
  GridPoint point(std::size_t k) const;
  double phi(const Ring& ring, int j) const;
  double ring_point_weight(const Ring& ring) const;

 private:
  int lmax_;
  int exactness_;
  std::vector<Ring> rings_;
  std::size_t size_ = 0;
};

using GridPtr = std::shared_ptr<const RingGrid>;

/// build_grid(lmax) as a free function.
GridPtr build_grid(int lmax);

/// Real field sampled at the points of a RingGrid.
struct SphereMap {
  GridPtr grid;
  std::vector<double> values;

  SphereMap() = default;
  explicit SphereMap(GridPtr g) : grid(std::move(g)), values(grid ? grid->size() : 0, 0.0) {}
  SphereMap(GridPtr g, std::vector<double> v);
};

/// Quadrature sum  sum_k lambda_k values[k].
double integrate(const SphereMap& map);

/// Samples f(theta, phi) at every grid point.
template <class F>
SphereMap sample(GridPtr grid, F&& f) {
  SphereMap m(grid);
  for (const Ring& r : grid->rings())
    for (int j = 0; j < r.n_phi; ++j) m.values[r.offset + j] = f(r.theta, grid->phi(r, j));
  return m;
}

}  // namespace sphwin
