#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "sphwin/errors.hpp"
#include "sphwin/linalg.hpp"

using namespace sphwin;
using namespace sphwin::linalg;

namespace {

SymmetricMatrix random_symmetric(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  SymmetricMatrix a(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) a.set(i, j, N(rng));
  return a;
}

}  // namespace

TEST_CASE("symmetric storage") {
  SymmetricMatrix a(3);
  a.set(0, 2, 4.0);
  CHECK(a(2, 0) == 4.0);
  a.add(2, 0, 1.0);
  CHECK(a(0, 2) == 5.0);
  a.add(1, 1, 2.0);
  CHECK(a(1, 1) == 2.0);
  Matrix m(2, 2);
  m << 1, 2, 99, 3;
  auto s = SymmetricMatrix::from_upper(m);
  CHECK(s(1, 0) == 2.0);
  CHECK((2.0 * s)(0, 1) == 4.0);
  CHECK((s + s).trace() == 8.0);
}

TEST_CASE("eigendecomposition") {
  SymmetricMatrix id(4);
  for (int i = 0; i < 4; ++i) id.set(i, i, 1.0);
  auto e = eig_symmetric(id);
  for (int i = 0; i < 4; ++i) CHECK(e.values(i) == doctest::Approx(1.0));

  SymmetricMatrix d(3);
  d.set(0, 0, 3.0);
  d.set(1, 1, 1.0);
  d.set(2, 2, 2.0);
  auto ed = eig_symmetric(d);
  CHECK(ed.values(0) == doctest::Approx(1.0));
  CHECK(ed.values(1) == doctest::Approx(2.0));
  CHECK(ed.values(2) == doctest::Approx(3.0));
  CHECK(std::abs(std::abs(ed.vectors(1, 0)) - 1.0) < 1e-15);
  CHECK(std::abs(std::abs(ed.vectors(2, 1)) - 1.0) < 1e-15);
  CHECK(std::abs(std::abs(ed.vectors(0, 2)) - 1.0) < 1e-15);

  std::mt19937_64 rng(1);
  auto a = random_symmetric(50, rng);
  auto r = eig_symmetric(a);
  for (int i = 1; i < 50; ++i) CHECK(r.values(i) >= r.values(i - 1));
  Matrix rec = r.vectors * r.values.asDiagonal() * r.vectors.transpose();
  CHECK((rec - a.dense()).norm() < 1e-10 * a.norm());
  CHECK((r.vectors.transpose() * r.vectors - Matrix::Identity(50, 50)).norm() < 1e-11);
  for (int i = 0; i < 50; ++i)
    CHECK((a.dense() * r.vectors.col(i) - r.values(i) * r.vectors.col(i)).norm() < 1e-11 * a.norm());

  // deterministic
  auto r2 = eig_symmetric(a);
  CHECK((r2.values - r.values).norm() == 0.0);
  CHECK((r2.vectors - r.vectors).norm() == 0.0);

  // Gram matrices have nonnegative spectra
  Matrix g = Matrix::Random(30, 10);
  auto gr = eig_symmetric(SymmetricMatrix::from_upper(g * g.transpose()));
  CHECK(gr.values(0) >= -1e-12);

  SymmetricMatrix bad(2);
  bad.set(0, 1, std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(eig_symmetric(bad), NumericError);
}

TEST_CASE("linear solves") {
  Vector rhs(3);
  rhs << 1, 2, 3;
  auto r = solve(Matrix::Identity(3, 3), rhs);
  CHECK((r.x - rhs).norm() == 0.0);
  CHECK(r.condition == doctest::Approx(1.0));
  Matrix d = Vector::LinSpaced(3, 2, 6).asDiagonal();
  auto rd = solve(d, rhs);
  CHECK(rd.x(0) == doctest::Approx(0.5));
  CHECK(rd.x(1) == doctest::Approx(0.5));
  CHECK(rd.x(2) == doctest::Approx(0.5));

  std::mt19937_64 rng(2);
  std::normal_distribution<double> N;
  Matrix a(64, 64);
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) a(i, j) = N(rng) + (i == j ? 20.0 : 0.0);
  Vector x(64);
  for (int i = 0; i < 64; ++i) x(i) = N(rng);
  auto s = solve(a, a * x);
  CHECK((s.x - x).norm() < 1e-10 * x.norm());
  CHECK((a * s.x - a * x).norm() <= 1e-10 * a.norm() * s.x.norm());
  CHECK(s.condition > 1.0);

  Matrix sing = Matrix::Zero(3, 3);
  sing(0, 0) = 1.0;
  CHECK_THROWS_AS(solve(sing, rhs), NumericError);
  CHECK_THROWS_AS(solve(Matrix::Identity(2, 2), rhs), PreconditionError);
}
