#pragma once

#include <Eigen/Dense>

namespace sphwin::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric matrix. Only the upper triangle is authoritative; the
/// lower one is mirrored on every write so the full storage stays symmetric.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(Eigen::Index n) : a_(Matrix::Zero(n, n)) {}

  /// Builds from the upper triangle of `m` (the lower triangle is ignored).
  static SymmetricMatrix from_upper(const Matrix& m);

  Eigen::Index order() const { return a_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return a_(i, j); }
  void set(Eigen::Index i, Eigen::Index j, double v) {
    a_(i, j) = v;
    a_(j, i) = v;
  }
  void add(Eigen::Index i, Eigen::Index j, double v) {
    a_(i, j) += v;
    if (i != j) a_(j, i) += v;
  }
  const Matrix& dense() const { return a_; }
  double trace() const { return a_.trace(); }
  double norm() const { return a_.norm(); }

  SymmetricMatrix& operator+=(const SymmetricMatrix& o) {
    a_ += o.a_;
    return *this;
  }
  SymmetricMatrix& operator*=(double s) {
    a_ *= s;
    return *this;
  }

 private:
  Matrix a_;
};

inline SymmetricMatrix operator+(SymmetricMatrix a, const SymmetricMatrix& b) { return a += b; }
inline SymmetricMatrix operator*(double s, SymmetricMatrix a) { return a *= s; }

struct EigenDecomposition {
  Vector values;   // ascending
  Matrix vectors;  // column i pairs with values(i)
};

/// Full eigendecomposition. Throws NumericError when the solver does not
/// converge or the input has non-finite entries.
EigenDecomposition eig_symmetric(const SymmetricMatrix& a);

struct SolveResult {
  Vector x;
  double condition = 0.0;  // 1-norm condition estimate
};

/// Solves a x = rhs by partial-pivoted LU. Throws NumericError if `a` is
/// singular at working precision.
SolveResult solve(const Matrix& a, const Vector& rhs);

}  // namespace sphwin::linalg
