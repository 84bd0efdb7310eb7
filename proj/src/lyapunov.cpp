#include "dissipair/lyapunov.hpp"

#include <sstream>

#include <Eigen/Eigenvalues>

namespace dissipair {

RMatrix solve_lyapunov(const RMatrix& a, const RMatrix& q, double tol) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || q.rows() != n || q.cols() != n)
    throw Error(ErrorCode::DimensionMismatch, "Lyapunov operands must be square and equal size");

  Eigen::ComplexSchur<CMatrix> schur(a.cast<cplx>());
  if (schur.info() != Eigen::Success) throw Error(ErrorCode::Numerical, "Schur decomposition did not converge");
  const CMatrix& t = schur.matrixT();
  const CMatrix& u = schur.matrixU();

  const double scale = std::max(a.norm(), 1e-300);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (t(i, i).real() >= -tol * scale) {
      std::ostringstream os;
      os << "drift has eigenvalue " << t(i, i) << " outside the open left half plane";
      throw Error(ErrorCode::Unstable, os.str());
    }
  }

  // With A = U T U^*, the transformed unknown Y = U^* X U solves
  // T Y + Y T^* = -U^* Q U. Column j couples only to columns k > j.
  const CMatrix c = -(u.adjoint() * q.cast<cplx>() * u);
  CMatrix y = CMatrix::Zero(n, n);
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    CVector rhs = c.col(j);
    for (Eigen::Index k = j + 1; k < n; ++k) rhs -= std::conj(t(j, k)) * y.col(k);
    const cplx shift = std::conj(t(j, j));
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      cplx acc = rhs(i);
      if (i + 1 < n) acc -= (t.row(i).tail(n - i - 1) * y.col(j).tail(n - i - 1)).value();
      y(i, j) = acc / (t(i, i) + shift);
    }
  }
  RMatrix x = (u * y * u.adjoint()).real();
  x = (0.5 * (x + x.transpose())).eval();

  const double residual = (a * x + x * a.transpose() + q).norm();
  if (residual > 1e-9 * std::max(q.norm(), 1e-300)) {
    std::ostringstream os;
    os << "Lyapunov residual " << residual << " exceeds tolerance";
    throw Error(ErrorCode::Numerical, os.str());
  }
  return x;
}

}  // namespace dissipair
