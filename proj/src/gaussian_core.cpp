#include "dissipair/gaussian_core.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

namespace dissipair {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::DimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::Domain: return "DOMAIN";
    case ErrorCode::Unstable: return "UNSTABLE";
    case ErrorCode::NonUnique: return "NON_UNIQUE";
    case ErrorCode::NotChiral: return "NOT_CHIRAL";
    case ErrorCode::Numerical: return "NUMERICAL";
    case ErrorCode::Config: return "CONFIG";
  }
  return "UNKNOWN";
}

void warn(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

namespace {

void check_index(Eigen::Index n, Eigen::Index site, const char* what) {
  if (site < 0 || site >= n) {
    std::ostringstream os;
    os << what << " index " << site << " outside [0, " << n << ")";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
}

// Returns (M + M^dag)/2 and warns when the anti-Hermitian part is not
// negligible.
CMatrix hermitize(const CMatrix& m, const char* name) {
  if (m.rows() != m.cols())
    throw Error(ErrorCode::DimensionMismatch, std::string(name) + " must be square");
  CMatrix h = 0.5 * (m + m.adjoint());
  const double scale = std::max(m.norm(), 1e-300);
  const double correction = (m - h).norm() / scale;
  if (correction > 1e-10) {
    std::ostringstream os;
    os << name << " was not Hermitian (relative correction " << correction << "); symmetrized";
    warn(os.str());
  }
  return h;
}

CMatrix symmetrize(const CMatrix& m, const char* name) {
  if (m.rows() != m.cols())
    throw Error(ErrorCode::DimensionMismatch, std::string(name) + " must be square");
  CMatrix s = 0.5 * (m + m.transpose());
  const double scale = std::max(m.norm(), 1e-300);
  if ((m - s).norm() / scale > 1e-10) warn(std::string(name) + " was not symmetric; symmetrized");
  return s;
}

}  // namespace

JumpOperator JumpOperator::pairing(Eigen::Index n_modes, Eigen::Index site0, Eigen::Index site1,
                                   double kappa, double eta) {
  check_index(n_modes, site0, "cooling site");
  check_index(n_modes, site1, "heating site");
  if (!(kappa > 0.0)) throw Error(ErrorCode::InvalidArgument, "kappa must be positive");
  JumpOperator l{CVector::Zero(n_modes), CVector::Zero(n_modes)};
  l.u(site0) = std::sqrt(kappa);
  l.v(site1) = eta * std::sqrt(kappa);
  return l;
}

JumpOperator JumpOperator::loss(Eigen::Index n_modes, Eigen::Index site, double rate) {
  check_index(n_modes, site, "loss site");
  JumpOperator l{CVector::Zero(n_modes), CVector::Zero(n_modes)};
  l.u(site) = std::sqrt(rate);
  return l;
}

JumpOperator JumpOperator::gain(Eigen::Index n_modes, Eigen::Index site, double rate) {
  check_index(n_modes, site, "gain site");
  JumpOperator l{CVector::Zero(n_modes), CVector::Zero(n_modes)};
  l.v(site) = std::sqrt(rate);
  return l;
}

QuadraticSystem::QuadraticSystem(CMatrix hopping, std::vector<JumpOperator> jumps, CMatrix pairing)
    : hopping_(hermitize(hopping, "hopping matrix")), jumps_(std::move(jumps)) {
  const Eigen::Index n = hopping_.rows();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "system needs at least one mode");
  if (pairing.size() == 0) {
    pairing_ = CMatrix::Zero(n, n);
  } else {
    if (pairing.rows() != n)
      throw Error(ErrorCode::DimensionMismatch, "pairing matrix size differs from hopping matrix");
    pairing_ = symmetrize(pairing, "pairing matrix");
  }
  for (const auto& j : jumps_) {
    if (j.u.size() != n || j.v.size() != n)
      throw Error(ErrorCode::DimensionMismatch, "jump operator coefficient length differs from n_modes");
    if (j.u.cwiseAbs().maxCoeff() == 0.0 && j.v.cwiseAbs().maxCoeff() == 0.0)
      throw Error(ErrorCode::InvalidArgument, "jump operator is identically zero");
  }
}

QuadraticSystem QuadraticSystem::with_jumps(std::vector<JumpOperator> jumps) const {
  return QuadraticSystem(hopping_, std::move(jumps), pairing_);
}

QuadraticSystem QuadraticSystem::with_jump(JumpOperator jump) const {
  auto jumps = jumps_;
  jumps.push_back(std::move(jump));
  return QuadraticSystem(hopping_, std::move(jumps), pairing_);
}

CovarianceState::CovarianceState(RMatrix v) : v_(std::move(v)) {
  if (v_.rows() != v_.cols() || v_.rows() % 2 != 0)
    throw Error(ErrorCode::DimensionMismatch, "covariance must be 2N x 2N");
}

CovarianceState CovarianceState::vacuum(Eigen::Index n_modes) {
  return CovarianceState(0.5 * RMatrix::Identity(2 * n_modes, 2 * n_modes));
}

CovarianceState CovarianceState::from_moments(const CMatrix& n, const CMatrix& m) {
  const Eigen::Index dim = n.rows();
  const RMatrix id = RMatrix::Identity(dim, dim);
  RMatrix v(2 * dim, 2 * dim);
  v.topLeftCorner(dim, dim) = n.real() + m.real() + 0.5 * id;
  v.bottomRightCorner(dim, dim) = n.real() - m.real() + 0.5 * id;
  v.topRightCorner(dim, dim) = n.imag() + m.imag();
  v.bottomLeftCorner(dim, dim) = v.topRightCorner(dim, dim).transpose();
  return CovarianceState(0.5 * (v + v.transpose()));
}

CMatrix CovarianceState::number_moments() const {
  const Eigen::Index dim = n_modes();
  const auto xx = v_.topLeftCorner(dim, dim);
  const auto pp = v_.bottomRightCorner(dim, dim);
  const auto xp = v_.topRightCorner(dim, dim);
  const auto px = v_.bottomLeftCorner(dim, dim);
  CMatrix n(dim, dim);
  n.real() = 0.5 * (xx + pp) - 0.5 * RMatrix::Identity(dim, dim);
  n.imag() = 0.5 * (xp - px);
  return n;
}

CMatrix CovarianceState::pairing_moments() const {
  const Eigen::Index dim = n_modes();
  CMatrix m(dim, dim);
  m.real() = 0.5 * (v_.topLeftCorner(dim, dim) - v_.bottomRightCorner(dim, dim));
  m.imag() = 0.5 * (v_.topRightCorner(dim, dim) + v_.bottomLeftCorner(dim, dim));
  return m;
}

CovarianceState CovarianceState::reduce(const std::vector<Eigen::Index>& modes) const {
  const Eigen::Index dim = n_modes();
  const auto k = static_cast<Eigen::Index>(modes.size());
  std::vector<Eigen::Index> idx(2 * k);
  for (Eigen::Index i = 0; i < k; ++i) {
    check_index(dim, modes[i], "reduced mode");
    idx[i] = modes[i];
    idx[k + i] = dim + modes[i];
  }
  return CovarianceState(v_(idx, idx));
}

void CovarianceState::validate() const {
  const double asym = (v_ - v_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(1.0, v_.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::Domain, "covariance matrix is not symmetric");
  CMatrix h = v_.cast<cplx>() + 0.5 * kI * symplectic_form(n_modes()).cast<cplx>();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8)
    throw Error(ErrorCode::Domain, "covariance violates the uncertainty relation");
}

RMatrix symplectic_form(Eigen::Index n_modes) {
  RMatrix omega = RMatrix::Zero(2 * n_modes, 2 * n_modes);
  omega.topRightCorner(n_modes, n_modes).setIdentity();
  omega.bottomLeftCorner(n_modes, n_modes) = -RMatrix::Identity(n_modes, n_modes);
  return omega;
}

RVector symplectic_eigenvalues(const CovarianceState& state) {
  const Eigen::Index n = state.n_modes();
  // V^{1/2} (i Omega) V^{1/2} is Hermitian with eigenvalues +-nu.
  Eigen::SelfAdjointEigenSolver<RMatrix> vs(state.matrix());
  if (vs.eigenvalues().minCoeff() <= 0.0)
    throw Error(ErrorCode::Domain, "covariance matrix is not positive definite");
  const RMatrix root = vs.operatorSqrt();
  const CMatrix h = kI * (root * symplectic_form(n) * root).cast<cplx>();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().tail(n);
}

BdgMatrix build_drift(const QuadraticSystem& system) {
  const Eigen::Index n = system.n_modes();
  CMatrix a11 = -kI * system.hopping();
  CMatrix a12 = -kI * system.pairing();
  for (const auto& j : system.jumps()) {
    // d<a_j> gains (v_j <L^dag> - conj(u_j) <L>)/2.
    a11 += 0.5 * (j.v * j.v.adjoint() - j.u.conjugate() * j.u.transpose());
    a12 += 0.5 * (j.v * j.u.adjoint() - j.u.conjugate() * j.v.transpose());
  }
  BdgMatrix out;
  out.matrix.resize(2 * n, 2 * n);
  out.matrix.topLeftCorner(n, n) = a11;
  out.matrix.topRightCorner(n, n) = a12;
  out.matrix.bottomLeftCorner(n, n) = a12.conjugate();
  out.matrix.bottomRightCorner(n, n) = a11.conjugate();
  out.basis = Basis::DoubledMode;
  return out;
}

RMatrix build_diffusion(const QuadraticSystem& system) {
  const Eigen::Index n = system.n_modes();
  const RMatrix omega = symplectic_form(n);
  RMatrix d = RMatrix::Zero(2 * n, 2 * n);
  const double r = 1.0 / std::sqrt(2.0);
  for (const auto& j : system.jumps()) {
    // L = c^T r with r = (x, p).
    CVector c(2 * n);
    c.head(n) = r * (j.u + j.v);
    c.tail(n) = kI * r * (j.u - j.v);
    const CVector oc = omega.cast<cplx>() * c;
    d += (oc.conjugate() * oc.transpose()).real();
  }
  return 0.5 * (d + d.transpose());
}

CMatrix quadrature_transform(Eigen::Index n_modes) {
  const double r = 1.0 / std::sqrt(2.0);
  const CMatrix id = CMatrix::Identity(n_modes, n_modes);
  CMatrix t(2 * n_modes, 2 * n_modes);
  t.topLeftCorner(n_modes, n_modes) = r * id;
  t.topRightCorner(n_modes, n_modes) = r * id;
  t.bottomLeftCorner(n_modes, n_modes) = -kI * r * id;
  t.bottomRightCorner(n_modes, n_modes) = kI * r * id;
  return t;
}

BdgMatrix to_quadrature_basis(const BdgMatrix& drift) {
  if (drift.basis != Basis::DoubledMode)
    throw Error(ErrorCode::InvalidArgument, "drift is already in the quadrature basis");
  const CMatrix t = quadrature_transform(drift.n_modes());
  return BdgMatrix{t * drift.matrix * t.adjoint(), Basis::Quadrature};
}

RMatrix quadrature_drift(const QuadraticSystem& system) {
  return to_quadrature_basis(build_drift(system)).matrix.real();
}

LossFrame local_loss_frame(double eta) {
  if (!(eta >= 0.0 && eta < 1.0))
    throw Error(ErrorCode::Domain, "local loss frame requires 0 <= eta < 1");
  const double s = 1.0 / std::sqrt(1.0 - eta * eta);
  LossFrame f;
  f.eta = eta;
  f.loss_factor = 1.0 - eta * eta;
  // a' = s (a + eta b^dag), b' = s (b + eta a^dag) on (a, b, a^dag, b^dag).
  f.transform = CMatrix::Zero(4, 4);
  f.transform(0, 0) = s;
  f.transform(0, 3) = s * eta;
  f.transform(1, 1) = s;
  f.transform(1, 2) = s * eta;
  f.transform(2, 2) = s;
  f.transform(2, 1) = s * eta;
  f.transform(3, 3) = s;
  f.transform(3, 0) = s * eta;
  return f;
}

std::pair<CMatrix, CMatrix> LossFrame::transform_hamiltonian(const CMatrix& hopping,
                                                             const CMatrix& pairing) const {
  if (hopping.rows() != 2 || hopping.cols() != 2)
    throw Error(ErrorCode::DimensionMismatch, "loss frame acts on two modes");
  const CMatrix k = pairing.size() == 0 ? CMatrix::Zero(2, 2) : pairing;
  // H = 1/2 alpha^dag Hb alpha + const with alpha = W alpha'.
  CMatrix hb(4, 4);
  hb << hopping, k, k.conjugate(), hopping.conjugate();
  const CMatrix w = transform.inverse();
  const CMatrix hp = w.adjoint() * hb * w;
  return {hp.topLeftCorner(2, 2), hp.topRightCorner(2, 2)};
}

JumpOperator LossFrame::transform_jump(const JumpOperator& jump) const {
  if (jump.size() != 2) throw Error(ErrorCode::DimensionMismatch, "loss frame acts on two modes");
  CVector w(4);
  w << jump.u, jump.v;
  const CVector wp = transform.inverse().transpose() * w;
  return JumpOperator{wp.head(2), wp.tail(2)};
}

}  // namespace dissipair
