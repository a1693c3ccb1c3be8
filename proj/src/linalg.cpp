#include "sphwin/linalg.hpp"

#include <cmath>
#include <limits>

#include "sphwin/errors.hpp"

namespace sphwin::linalg {

SymmetricMatrix SymmetricMatrix::from_upper(const Matrix& m) {
  if (m.rows() != m.cols()) throw PreconditionError("SymmetricMatrix: matrix is not square");
  SymmetricMatrix s(m.rows());
  s.a_ = m.triangularView<Eigen::Upper>();
  s.a_.triangularView<Eigen::StrictlyLower>() = m.transpose().triangularView<Eigen::StrictlyLower>();
  return s;
}

EigenDecomposition eig_symmetric(const SymmetricMatrix& a) {
  if (!a.dense().allFinite()) throw NumericError("eig_symmetric: non-finite matrix entries");
  if (a.order() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.dense(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericError("eig_symmetric: solver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

SolveResult solve(const Matrix& a, const Vector& rhs) {
  if (a.rows() != a.cols() || a.rows() != rhs.size())
    throw PreconditionError("solve: dimension mismatch");
  if (a.rows() == 0) return {Vector(), 1.0};
  Eigen::PartialPivLU<Matrix> lu(a);
  const double eps = std::numeric_limits<double>::epsilon();
  const Vector pivots = lu.matrixLU().diagonal().cwiseAbs();
  const double rcond = lu.rcond();
  if (!(pivots.minCoeff() > eps * pivots.maxCoeff()) || !(rcond > eps))
    throw NumericError("solve: matrix is singular to working precision");
  Vector x = lu.solve(rhs);
  if (!x.allFinite()) throw NumericError("solve: non-finite solution");
  return {x, 1.0 / rcond};
}

}  // namespace sphwin::linalg
