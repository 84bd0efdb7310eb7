#include "dissipair/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dissipair/lyapunov.hpp"
#include "dissipair/parallel.hpp"
#include "dissipair/stability.hpp"

namespace dissipair {

namespace {

struct CanonicalJump {
  Eigen::Index cooling = 0;
  Eigen::Index heating = 0;
  cplx eta;
};

// Recognizes sqrt(k) (a_c + eta a_h^dag) up to an overall phase.
CanonicalJump parse_jump(const JumpOperator& jump, Eigen::Index n) {
  if (jump.size() != n) throw Error(ErrorCode::DimensionMismatch, "jump size differs from lattice");
  auto support = [](const CVector& c, Eigen::Index& where) {
    int count = 0;
    for (Eigen::Index i = 0; i < c.size(); ++i)
      if (c(i) != 0.0) {
        where = i;
        ++count;
      }
    return count;
  };
  CanonicalJump out;
  const int nu = support(jump.u, out.cooling);
  const int nv = support(jump.v, out.heating);
  if (nu != 1 || nv > 1)
    throw Error(ErrorCode::InvalidArgument, "pair construction needs a jump sqrt(k)(a_c + eta a_h^dag)");
  if (nv == 0) out.heating = out.cooling;
  out.eta = nv == 0 ? cplx(0.0) : jump.v(out.heating) / jump.u(out.cooling);
  return out;
}

double wrap_phase(double p) {
  const double two_pi = 2.0 * std::numbers::pi;
  p = std::fmod(p, two_pi);
  return p < 0.0 ? p + two_pi : p;
}

void check_spacing(const EigenmodeSet& modes, const BogoliubovOptions& opt) {
  if (modes.n_zero() > 1) {
    std::ostringstream os;
    os << modes.n_zero() << " zero modes: steady state is not unique";
    throw Error(ErrorCode::NonUnique, os.str());
  }
  const double scale = std::max(modes.scale, 1e-300);
  std::vector<double> e(modes.energies.data(), modes.energies.data() + modes.n_pairs());
  std::sort(e.begin(), e.end());
  double spacing = e.empty() ? scale : e.front();  // distance to the -e partner or to a zero mode
  for (std::size_t k = 1; k < e.size(); ++k) spacing = std::min(spacing, e[k] - e[k - 1]);
  const double rel = spacing / scale;
  if (rel < opt.nonunique_tol) {
    std::ostringstream os;
    os << "degenerate normal modes (relative spacing " << rel << "): steady state is not unique";
    throw Error(ErrorCode::NonUnique, os.str());
  }
  if (opt.warn && rel < opt.warn_tol) {
    std::ostringstream os;
    os << "nearly degenerate normal modes (relative spacing " << rel << "); relaxation time ~ "
       << 1.0 / spacing;
    warn(os.str());
  }
}

// t = (heating amplitude) / (cooling amplitude) for one mode.
cplx squeeze_ratio(cplx cool, cplx heat, cplx eta, double sign) {
  const double scale = std::max(std::abs(cool), std::abs(heat));
  if (scale < 1e-14) throw Error(ErrorCode::NonUnique, "a normal mode does not couple to the dissipator");
  if (std::abs(cool) < 1e-14 * std::max(1.0, std::abs(eta)))
    throw Error(ErrorCode::Unstable, "a normal mode is heated but not cooled");
  return sign * eta * std::conj(heat) / cool;
}

ModeSqueeze make_squeeze(double energy, cplx t, cplx cool) {
  const double mag = std::abs(t);
  if (mag >= 1.0) {
    std::ostringstream os;
    os << "mode at energy " << energy << " has tanh r = " << mag << " >= 1";
    throw Error(ErrorCode::Unstable, os.str());
  }
  ModeSqueeze s;
  s.energy = energy;
  s.r = std::atanh(mag);
  s.phase = mag > 0.0 ? wrap_phase(std::arg(t)) : 0.0;
  s.weight = cool * std::sqrt(1.0 - mag * mag);
  return s;
}

}  // namespace

SteadyState bogoliubov_steady_state(const EigenmodeSet& modes, const JumpOperator& jump,
                                    const BogoliubovOptions& options) {
  const Eigen::Index n = modes.n_sites();
  const CanonicalJump j = parse_jump(jump, n);
  const double sign = modes.sublattice_sign(j.cooling);
  if (std::abs(j.eta) > 0.0 && modes.sublattice_sign(j.heating) != sign)
    throw Error(ErrorCode::Domain, "cooling and heating sites must share a sublattice");
  check_spacing(modes, options);

  const Eigen::Index p = modes.n_pairs();
  const Eigen::Index z = modes.n_zero();
  CMatrix phi(n, 2 * p + z);
  phi << modes.positive, modes.negative, modes.zero_modes;
  RVector occupation = RVector::Zero(phi.cols());
  CMatrix q = CMatrix::Zero(phi.cols(), phi.cols());  // <d_k d_l>

  SteadyState out;
  for (Eigen::Index k = 0; k < p; ++k) {
    const cplx cool = modes.positive(j.cooling, k);
    const cplx t = squeeze_ratio(cool, modes.positive(j.heating, k), j.eta, sign);
    const ModeSqueeze s = make_squeeze(modes.energies(k), t, cool);
    const double sh = std::sinh(s.r), ch = std::cosh(s.r);
    occupation(k) = occupation(p + k) = sh * sh;
    q(k, p + k) = q(p + k, k) = -std::polar(ch * sh, s.phase);
    out.squeeze.pairs.push_back(s);
  }
  for (Eigen::Index k = 0; k < z; ++k) {
    const cplx cool = modes.zero_modes(j.cooling, k);
    const cplx t = squeeze_ratio(cool, modes.zero_modes(j.heating, k), j.eta, 1.0);
    const ModeSqueeze s = make_squeeze(0.0, t, cool);
    const double sh = std::sinh(s.r), ch = std::cosh(s.r);
    occupation(2 * p + k) = sh * sh;
    q(2 * p + k, 2 * p + k) = -std::polar(ch * sh, s.phase);
    out.squeeze.zero_modes.push_back(s);
  }

  const CMatrix number = phi.conjugate() * occupation.cast<cplx>().asDiagonal() * phi.transpose();
  const CMatrix pairing = phi * q * phi.transpose();
  out.covariance = CovarianceState::from_moments(number, pairing);
  return out;
}

CovarianceState lyapunov_steady_state(const QuadraticSystem& system) {
  return CovarianceState(solve_lyapunov(quadrature_drift(system), build_diffusion(system)));
}

ObservableSet observables(const CovarianceState& state) {
  state.validate();
  ObservableSet o;
  o.number = state.number_moments();
  o.pairing = state.pairing_moments();
  o.density = o.number.diagonal().real();
  o.total = o.density.sum();
  const RVector nu = symplectic_eigenvalues(state);
  o.purity = 1.0;
  for (Eigen::Index k = 0; k < nu.size(); ++k) o.purity /= 2.0 * nu(k);
  return o;
}

QuadraticSystem mirrored_dissipator(const QuadraticSystem& system, const JumpOperator& jump) {
  const Eigen::Index n = system.n_modes();
  if (n % 2 != 0) throw Error(ErrorCode::InvalidArgument, "mirrored dissipator needs an even number of sites");
  if (jump.size() != n) throw Error(ErrorCode::DimensionMismatch, "jump size differs from lattice");
  const CMatrix& h = system.hopping();
  const CMatrix flipped = h.reverse();
  if ((h - flipped).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::InvalidArgument, "lattice is not mirror symmetric");
  JumpOperator mirror{jump.u.reverse(), -jump.v.reverse()};
  return system.with_jump(std::move(mirror));
}

QuadraticSystem squeezed_noise_system(const QuadraticSystem& system, Eigen::Index site0, Eigen::Index site1,
                                      double kappa, double eta) {
  if (!(std::abs(eta) < 1.0)) throw Error(ErrorCode::Domain, "comparator requires |eta| < 1");
  const Eigen::Index n = system.n_modes();
  return system.with_jumps({JumpOperator::pairing(n, site0, site1, kappa, eta),
                            JumpOperator::pairing(n, site1, site0, kappa, eta)});
}

ComparatorResult squeezed_noise_comparator(const QuadraticSystem& system, Eigen::Index site0, Eigen::Index site1,
                                           double kappa, double eta) {
  const QuadraticSystem full = squeezed_noise_system(system, site0, site1, kappa, eta);
  const SpectrumReport r = system_spectrum(full);
  ComparatorResult out;
  out.stable = r.stable;
  out.max_real_part = r.max_real_part;
  if (r.stable && r.max_real_part < -r.tolerance) {
    out.observables = observables(lyapunov_steady_state(full));
    out.has_state = true;
  }
  return out;
}

std::vector<GapRow> dissipative_gap_vs_size(const std::function<QuadraticSystem(Eigen::Index)>& family,
                                            const std::vector<Eigen::Index>& sizes, int threads) {
  std::vector<GapRow> rows(sizes.size());
  parallel_for(sizes.size(), threads, [&](std::size_t k) {
    const SpectrumReport r = system_spectrum(family(sizes[k]));
    rows[k] = {sizes[k], r.dissipative_gap, r.stable};
  });
  return rows;
}

}  // namespace dissipair
