#include "dissipair/output_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "dissipair/parallel.hpp"
#include "dissipair/stability.hpp"

namespace dissipair {

namespace {

void check_setup(const IoSetup& s) {
  const Eigen::Index n = s.lattice.n_modes();
  for (Eigen::Index site : {s.cooling_site, s.heating_site, s.output_site})
    if (site < 0 || site >= n) throw Error(ErrorCode::InvalidArgument, "site index out of range");
  if (s.cooling_site == s.heating_site) throw Error(ErrorCode::InvalidArgument, "cooling and heating sites coincide");
  if (!(s.output_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "waveguide rate must be positive");
  if (!(s.ancilla_loss > 0.0)) throw Error(ErrorCode::InvalidArgument, "ancilla loss must be positive");
  if (!(s.coupling >= 0.0)) throw Error(ErrorCode::InvalidArgument, "ancilla coupling must be non-negative");
  if (!std::isfinite(s.eta)) throw Error(ErrorCode::InvalidArgument, "eta must be finite");
  if (s.lattice.has_pairing() || !s.lattice.jumps().empty())
    throw Error(ErrorCode::InvalidArgument, "lattice must be passive (hopping only)");
}

bool drift_stable(const IoSystem& io) { return spectrum(io.drift).stable; }

double p_zero(const IoSetup& setup, double eta) {
  IoSetup s = setup;
  s.eta = eta;
  const IoSystem io = assemble_io_system(s);
  if (!drift_stable(io)) throw Error(ErrorCode::Unstable, "extended system unstable at eta = " + std::to_string(eta));
  return output_quadrature_spectrum(io, 0.0).squeezed;
}

}  // namespace

IoSystem assemble_io_system(const IoSetup& setup) {
  check_setup(setup);
  const Eigen::Index n = setup.lattice.n_modes();
  const Eigen::Index m = n + 1;
  const Eigen::Index b = n;

  CMatrix hop = CMatrix::Zero(m, m);
  hop.topLeftCorner(n, n) = setup.lattice.hopping();
  hop(b, setup.cooling_site) = setup.coupling;
  hop(setup.cooling_site, b) = setup.coupling;
  CMatrix pair = CMatrix::Zero(m, m);
  pair(setup.heating_site, b) = setup.coupling * setup.eta;
  pair(b, setup.heating_site) = setup.coupling * setup.eta;

  std::vector<JumpOperator> jumps{JumpOperator::loss(m, setup.output_site, setup.output_rate),
                                  JumpOperator::loss(m, b, setup.ancilla_loss)};

  IoSystem io;
  io.ancilla = b;
  io.system = QuadraticSystem(hop, jumps, pair);
  io.drift = build_drift(io.system);

  io.input = CMatrix::Zero(2 * m, 4);
  const double root_out = std::sqrt(setup.output_rate);
  const double root_anc = std::sqrt(setup.ancilla_loss);
  io.input(setup.output_site, 0) = -root_out;
  io.input(b, 1) = -root_anc;
  io.input(m + setup.output_site, 2) = -root_out;
  io.input(m + b, 3) = -root_anc;

  io.output = CMatrix::Zero(2, 2 * m);
  io.output(0, setup.output_site) = root_out;
  io.output(1, m + setup.output_site) = root_out;
  return io;
}

IoSystem build_io_system(const IoSetup& setup) {
  IoSystem io = assemble_io_system(setup);
  if (setup.output_rate >= setup.ancilla_loss)
    warn("waveguide rate is not small compared with the ancilla loss");
  const SpectrumReport r = spectrum(io.drift);
  if (!r.stable)
    throw Error(ErrorCode::Unstable,
                "extended system unstable: max Re lambda = " + std::to_string(r.max_real_part));
  return io;
}

RMatrix output_spectral_matrix(const IoSystem& io, double omega) {
  const Eigen::Index dim = io.drift.matrix.rows();
  // Input noise <xi_i(w) xi_j(w')> = 2 pi delta(w + w') noise_ij for vacuum.
  CMatrix noise = CMatrix::Zero(4, 4);
  noise(0, 2) = 1.0;
  noise(1, 3) = 1.0;
  CMatrix direct = CMatrix::Zero(2, 4);
  direct(0, 0) = 1.0;
  direct(1, 2) = 1.0;

  auto transfer = [&](double w) -> CMatrix {
    const CMatrix resolvent = -kI * w * CMatrix::Identity(dim, dim) - io.drift.matrix;
    Eigen::PartialPivLU<CMatrix> lu(resolvent);
    const double det_scale = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(det_scale > 1e-14 * io.drift.matrix.cwiseAbs().maxCoeff()))
      throw Error(ErrorCode::Numerical, "singular resolvent at omega = " + std::to_string(w));
    return io.output * lu.solve(io.input) + direct;
  };

  const CMatrix t_plus = transfer(omega);
  const CMatrix t_minus = transfer(-omega);
  CMatrix s = t_plus * noise * t_minus.transpose();
  s = (0.5 * (s + s.transpose())).eval();
  // q(theta) = e^{i theta} a_out + e^{-i theta} a_out^dag = (cos, sin) . rot . (a_out, a_out^dag).
  CMatrix rot(2, 2);
  rot << 1.0, 1.0, kI, -kI;
  const CMatrix quad = rot * s * rot.transpose();
  RMatrix real = quad.real();
  return (0.5 * (real + real.transpose())).eval();
}

QuadratureSpectrum output_quadrature_spectrum(const IoSystem& io, double omega) {
  const RMatrix real = output_spectral_matrix(io, omega);
  Eigen::SelfAdjointEigenSolver<RMatrix> eig(real);
  QuadratureSpectrum out;
  out.squeezed = eig.eigenvalues()(0);
  out.antisqueezed = eig.eigenvalues()(1);
  double theta = std::atan2(eig.eigenvectors()(1, 0), eig.eigenvectors()(0, 0));
  if (theta < 0.0) theta += std::numbers::pi;
  if (theta >= std::numbers::pi) theta -= std::numbers::pi;
  out.theta = theta;
  return out;
}

std::vector<double> default_frequency_grid(double extent, int points) {
  if (points < 3 || points % 2 == 0) throw Error(ErrorCode::InvalidArgument, "grid needs an odd number >= 3 of points");
  if (!(extent > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid extent must be positive");
  const int half = (points - 1) / 2;
  std::vector<double> positive(half);
  // Geometric from extent * 1e-4 up to extent.
  for (int k = 0; k < half; ++k) {
    const double t = half == 1 ? 1.0 : static_cast<double>(k) / (half - 1);
    positive[k] = extent * std::pow(10.0, -4.0 + 4.0 * t);
  }
  std::vector<double> grid;
  grid.reserve(points);
  for (int k = half - 1; k >= 0; --k) grid.push_back(-positive[k]);
  grid.push_back(0.0);
  for (int k = 0; k < half; ++k) grid.push_back(positive[k]);
  return grid;
}

SqueezeSpectrumResult squeezing_spectrum(const IoSetup& setup, const std::vector<double>& omega, int threads) {
  const IoSystem io = build_io_system(setup);
  SqueezeSpectrumResult r;
  r.omega = omega;
  r.squeezed.resize(omega.size());
  r.antisqueezed.resize(omega.size());
  r.theta.resize(omega.size());
  parallel_for(omega.size(), threads, [&](std::size_t k) {
    const QuadratureSpectrum q = output_quadrature_spectrum(io, omega[k]);
    r.squeezed[k] = q.squeezed;
    r.antisqueezed[k] = q.antisqueezed;
    r.theta[k] = q.theta;
  });
  return r;
}

double io_eta_critical(const IoSetup& setup, double high, double rel_tol) {
  auto family = [&](double eta) {
    IoSetup s = setup;
    s.eta = eta;
    return assemble_io_system(s).system;
  };
  return eta_critical_spectral(family, 0.0, high, rel_tol).critical;
}

EtaOptimum eta_opt_search(const IoSetup& setup, double low, double high, double tol) {
  if (!(low >= 0.0 && high > low)) throw Error(ErrorCode::InvalidArgument, "invalid eta bracket");
  EtaOptimum best;
  const double f_low = p_zero(setup, low);
  const double f_high = p_zero(setup, high);

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = low, b = high;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = p_zero(setup, c);
  double fd = p_zero(setup, d);
  double f_min = std::min({f_low, f_high, fc, fd});
  double f_max = std::max({f_low, f_high, fc, fd});
  while (b - a > tol * std::max(1.0, std::abs(b))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = p_zero(setup, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = p_zero(setup, d);
    }
    f_min = std::min({f_min, fc, fd});
    f_max = std::max({f_max, fc, fd});
  }
  best.eta = 0.5 * (a + b);
  best.p0 = p_zero(setup, best.eta);
  best.flat = f_max - f_min < 1e-12;
  if (f_low < best.p0 && f_low <= f_high) {
    best.eta = low;
    best.p0 = f_low;
  } else if (f_high < best.p0) {
    best.eta = high;
    best.p0 = f_high;
  }
  try {
    best.eta_critical = io_eta_critical(setup, std::max(2.0 * high, 1.0));
  } catch (const Error&) {
    best.eta_critical = std::numeric_limits<double>::infinity();
  }
  return best;
}

std::vector<EtaSweepRow> eta_sweep(const IoSetup& setup, const std::vector<double>& etas, int threads) {
  std::vector<EtaSweepRow> rows(etas.size());
  parallel_for(etas.size(), threads, [&](std::size_t k) {
    IoSetup s = setup;
    s.eta = etas[k];
    const IoSystem io = assemble_io_system(s);
    rows[k].eta = etas[k];
    rows[k].stable = drift_stable(io);
    rows[k].p0 = rows[k].stable ? output_quadrature_spectrum(io, 0.0).squeezed
                                : std::numeric_limits<double>::quiet_NaN();
  });
  return rows;
}

}  // namespace dissipair
