#ifndef DISSIPAIR_GAUSSIAN_CORE_HPP
#define DISSIPAIR_GAUSSIAN_CORE_HPP

#include <vector>

#include "dissipair/types.hpp"

namespace dissipair {

/// Linear jump operator L = sum_i u_i a_i + v_i a_i^dagger.
///
/// Coefficients carry units of sqrt(rate). The dissipator D[L] damps modes
/// with weight in `u` and anti-damps modes with weight in `v`.
struct JumpOperator {
  CVector u;
  CVector v;

  Eigen::Index size() const { return u.size(); }

  /// L = sqrt(kappa) * (a_site0 + eta * a_site1^dagger).
  static JumpOperator pairing(Eigen::Index n_modes, Eigen::Index site0, Eigen::Index site1,
                              double kappa, double eta);
  /// L = sqrt(rate) * a_site.
  static JumpOperator loss(Eigen::Index n_modes, Eigen::Index site, double rate);
  /// L = sqrt(rate) * a_site^dagger.
  static JumpOperator gain(Eigen::Index n_modes, Eigen::Index site, double rate);
};

/// Quadratic bosonic model: H = sum_ij H_ij a_i^dag a_j
///                              + 1/2 sum_ij (K_ij a_i^dag a_j^dag + h.c.),
/// plus a list of linear jump operators.
///
/// The hopping matrix is Hermitized on construction (a warning is emitted when
/// the correction exceeds 1e-10 relative). The pairing matrix K is symmetrized
/// the same way and defaults to zero; it only appears in the few-mode
/// parametric models and in the ancilla-extended output model.
class QuadraticSystem {
 public:
  QuadraticSystem() = default;
  explicit QuadraticSystem(CMatrix hopping, std::vector<JumpOperator> jumps = {},
                           CMatrix pairing = CMatrix());

  Eigen::Index n_modes() const { return hopping_.rows(); }
  const CMatrix& hopping() const { return hopping_; }
  const CMatrix& pairing() const { return pairing_; }
  const std::vector<JumpOperator>& jumps() const { return jumps_; }
  bool has_pairing() const { return pairing_.cwiseAbs().maxCoeff() > 0.0; }

  QuadraticSystem with_jumps(std::vector<JumpOperator> jumps) const;
  QuadraticSystem with_jump(JumpOperator jump) const;

 private:
  CMatrix hopping_;
  CMatrix pairing_;
  std::vector<JumpOperator> jumps_;
};

enum class Basis { DoubledMode, Quadrature };

/// Drift matrix of the first moments.
///
/// In the doubled-mode basis it acts on (<a_1>..<a_N>, <a_1^dag>..<a_N^dag>);
/// in the quadrature basis on (x_1..x_N, p_1..p_N) with
/// x = (a + a^dag)/sqrt(2), p = -i (a - a^dag)/sqrt(2).
struct BdgMatrix {
  CMatrix matrix;
  Basis basis = Basis::DoubledMode;

  Eigen::Index n_modes() const { return matrix.rows() / 2; }
};

/// Quadrature covariance V_mn = <{dr_m, dr_n}>/2, vacuum V = I/2.
class CovarianceState {
 public:
  CovarianceState() = default;
  explicit CovarianceState(RMatrix v);

  static CovarianceState vacuum(Eigen::Index n_modes);
  /// Assemble V from N_ij = <a_i^dag a_j> and M_ij = <a_i a_j>.
  static CovarianceState from_moments(const CMatrix& n, const CMatrix& m);

  Eigen::Index n_modes() const { return v_.rows() / 2; }
  const RMatrix& matrix() const { return v_; }

  CMatrix number_moments() const;   // N_ij = <a_i^dag a_j>
  CMatrix pairing_moments() const;  // M_ij = <a_i a_j>

  /// Reduced state on a subset of modes.
  CovarianceState reduce(const std::vector<Eigen::Index>& modes) const;

  /// Throws Error(Domain) when V is not symmetric to 1e-10 or violates
  /// V + i/2 Omega >= -1e-8.
  void validate() const;

 private:
  RMatrix v_;
};

/// Standard symplectic form Omega = [[0, I], [-I, 0]] in (x, p) ordering.
RMatrix symplectic_form(Eigen::Index n_modes);

/// Symplectic eigenvalues (ascending), i.e. the positive eigenvalues of
/// i Omega V. All equal 1/2 for a pure state.
RVector symplectic_eigenvalues(const CovarianceState& state);

/// Drift A with d/dt (<a>, <a^dag>) = A (<a>, <a^dag>).
BdgMatrix build_drift(const QuadraticSystem& system);

/// Diffusion D_q with dV/dt = A_q V + V A_q^T + D_q for vacuum inputs.
RMatrix build_diffusion(const QuadraticSystem& system);

/// Similarity transform of a doubled-mode drift into the (x, p) basis.
BdgMatrix to_quadrature_basis(const BdgMatrix& drift);

/// Real quadrature drift A_q; shortcut for to_quadrature_basis(build_drift(s)).
RMatrix quadrature_drift(const QuadraticSystem& system);

/// Unitary taking the doubled-mode vector to the (x, p) vector.
CMatrix quadrature_transform(Eigen::Index n_modes);

/// Two-mode squeezing frame in which L = sqrt(kappa)(a + eta b^dag) becomes
/// pure loss sqrt(kappa (1 - eta^2)) a'.
///
/// `transform` maps (a, b, a^dag, b^dag) to (a', b', a'^dag, b'^dag).
struct LossFrame {
  double eta = 0.0;
  CMatrix transform;
  double loss_factor = 1.0;  // L = sqrt(kappa * loss_factor) a'

  /// Quadratic form (hopping, pairing) re-expressed in the primed modes, up
  /// to a constant.
  std::pair<CMatrix, CMatrix> transform_hamiltonian(const CMatrix& hopping,
                                                    const CMatrix& pairing) const;
  /// Jump operator coefficients in the primed modes.
  JumpOperator transform_jump(const JumpOperator& jump) const;
};

LossFrame local_loss_frame(double eta);

}  // namespace dissipair

#endif  // DISSIPAIR_GAUSSIAN_CORE_HPP
