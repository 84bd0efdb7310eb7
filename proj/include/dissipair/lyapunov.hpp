#ifndef DISSIPAIR_LYAPUNOV_HPP
#define DISSIPAIR_LYAPUNOV_HPP

#include "dissipair/types.hpp"

namespace dissipair {

/// Solves A X + X A^T + Q = 0 for real A (all eigenvalues in the open left
/// half plane) by complex Schur decomposition and back substitution.
///
/// Throws Error(Unstable) when A has an eigenvalue with Re >= -tol * ||A||
/// and Error(Numerical) when the relative residual exceeds 1e-9.
RMatrix solve_lyapunov(const RMatrix& a, const RMatrix& q, double tol = 1e-12);

}  // namespace dissipair

#endif  // DISSIPAIR_LYAPUNOV_HPP
