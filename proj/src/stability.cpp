#include "dissipair/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "dissipair/parallel.hpp"

namespace dissipair {

namespace {

// Exact zeros of the drift come from symmetry (a conserved quadrature). They
// are found by a rank test and left out of the gap; every other eigenvalue
// counts however small its real part is.
template <typename Matrix>
Eigen::Index drift_nullity(const Matrix& m) {
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  qr.setThreshold(1e-13);
  return m.rows() - qr.rank();
}

SpectrumReport summarize(CVector eig, double rel_tol, Eigen::Index nullity) {
  SpectrumReport r;
  r.eigenvalues = std::move(eig);
  const double radius = r.eigenvalues.size() ? r.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  r.tolerance = rel_tol * std::max(radius, 1e-300);
  r.max_real_part = -std::numeric_limits<double>::infinity();
  for (const cplx& l : r.eigenvalues) r.max_real_part = std::max(r.max_real_part, l.real());
  std::vector<cplx> by_size(r.eigenvalues.data(), r.eigenvalues.data() + r.eigenvalues.size());
  std::sort(by_size.begin(), by_size.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
  r.dissipative_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = static_cast<std::size_t>(nullity); i < by_size.size(); ++i)
    r.dissipative_gap = std::min(r.dissipative_gap, std::abs(by_size[i].real()));
  if (!std::isfinite(r.dissipative_gap)) r.dissipative_gap = 0.0;
  r.stable = r.max_real_part <= r.tolerance;
  return r;
}

void require_finite(const auto& m) {
  if (!m.allFinite()) throw Error(ErrorCode::Numerical, "drift matrix has non-finite entries");
}

}  // namespace

SpectrumReport spectrum(const BdgMatrix& drift, double rel_tol) {
  require_finite(drift.matrix);
  Eigen::ComplexEigenSolver<CMatrix> es(drift.matrix, false);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::Numerical, "drift eigensolver did not converge");
  return summarize(es.eigenvalues(), rel_tol, drift_nullity(drift.matrix));
}

SpectrumReport spectrum(const RMatrix& quadrature_drift, double rel_tol) {
  require_finite(quadrature_drift);
  Eigen::EigenSolver<RMatrix> es(quadrature_drift, false);
  if (es.info() == Eigen::Success) return summarize(es.eigenvalues(), rel_tol, drift_nullity(quadrature_drift));
  // The real Schur iteration occasionally stalls on strongly non-normal
  // drifts; the complex one uses different shifts.
  Eigen::ComplexEigenSolver<CMatrix> ces(quadrature_drift.cast<cplx>(), false);
  if (ces.info() != Eigen::Success) throw Error(ErrorCode::Numerical, "drift eigensolver did not converge");
  return summarize(ces.eigenvalues(), rel_tol, drift_nullity(quadrature_drift));
}

SpectrumReport system_spectrum(const QuadraticSystem& system, double rel_tol) {
  return spectrum(quadrature_drift(system), rel_tol);
}

StabilityBoundary eta_critical_spectral(const SystemFamily& family, double low, double high, double rel_tol,
                                        const std::string& parameter) {
  auto stable_at = [&family](double p) { return system_spectrum(family(p)).stable; };
  if (!stable_at(low) || stable_at(high)) {
    std::ostringstream os;
    os << "bracket [" << low << ", " << high << "] for " << parameter
       << " does not go from stable to unstable";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  StabilityBoundary b;
  b.parameter = parameter;
  b.method = BoundaryMethod::Bisection;
  while (b.iterations < 200 && std::abs(high - low) > rel_tol * std::max(std::abs(high), std::abs(low))) {
    const double mid = 0.5 * (low + high);
    (stable_at(mid) ? low : high) = mid;
    ++b.iterations;
  }
  b.low = low;
  b.high = high;
  b.critical = 0.5 * (low + high);
  return b;
}

StabilityBoundary eta_critical_wavefunction(const EigenmodeSet& modes, Eigen::Index cooling_site,
                                            Eigen::Index heating_site) {
  const Eigen::Index n = modes.n_sites();
  if (cooling_site < 0 || cooling_site >= n || heating_site < 0 || heating_site >= n)
    throw Error(ErrorCode::InvalidArgument, "dissipator site outside lattice");
  if (modes.sublattice_sign(cooling_site) != modes.sublattice_sign(heating_site))
    throw Error(ErrorCode::Domain, "cooling and heating sites must share a sublattice");

  double best = std::numeric_limits<double>::infinity();
  auto visit = [&](const CMatrix& vecs) {
    for (Eigen::Index k = 0; k < vecs.cols(); ++k) {
      const double h = std::abs(vecs(heating_site, k));
      if (h < 1e-14) continue;
      best = std::min(best, std::abs(vecs(cooling_site, k)) / h);
    }
  };
  visit(modes.positive);
  visit(modes.zero_modes);

  StabilityBoundary b;
  b.method = BoundaryMethod::Fgr;
  b.critical = b.low = b.high = best;
  return b;
}

FgrRates fgr_rates(const EigenmodeSet& modes, const std::vector<JumpOperator>& jumps) {
  auto rate = [&jumps](const CVector& psi) {
    double g = 0.0;
    for (const auto& j : jumps) {
      if (j.size() != psi.size()) throw Error(ErrorCode::DimensionMismatch, "jump size differs from lattice");
      g += 0.5 * (std::norm(j.u.conjugate().dot(psi)) - std::norm(j.v.dot(psi)));
    }
    return g;
  };
  FgrRates out;
  out.pairs.resize(modes.n_pairs());
  for (Eigen::Index k = 0; k < modes.n_pairs(); ++k) out.pairs(k) = rate(modes.positive.col(k));
  out.zero_modes.resize(modes.n_zero());
  for (Eigen::Index k = 0; k < modes.n_zero(); ++k) out.zero_modes(k) = rate(modes.zero_modes.col(k));
  return out;
}

namespace {

struct ClosestPair {
  double gap = std::numeric_limits<double>::infinity();
  Eigen::Index i = -1;
  Eigen::Index j = -1;
};

ClosestPair closest_pair(const CMatrix& a, const Eigen::ComplexEigenSolver<CMatrix>& es, double semisimple_tol) {
  const CVector& l = es.eigenvalues();
  const double scale = std::max(1.0, l.cwiseAbs().maxCoeff());
  ClosestPair best;
  for (Eigen::Index i = 0; i < l.size(); ++i) {
    for (Eigen::Index j = i + 1; j < l.size(); ++j) {
      const double d = std::abs(l(i) - l(j)) / scale;
      if (d >= best.gap) continue;
      if (d < 1e-4) {
        // A cluster whose geometric multiplicity matches its size is a
        // symmetry degeneracy, not a coalescence.
        const cplx mean = 0.5 * (l(i) + l(j));
        const double radius = std::abs(l(i) - l(j)) + semisimple_tol * scale;
        Eigen::Index cluster = 0;
        for (Eigen::Index k = 0; k < l.size(); ++k) cluster += std::abs(l(k) - mean) <= radius;
        CMatrix shifted = a;
        shifted.diagonal().array() -= mean;
        Eigen::JacobiSVD<CMatrix> svd(shifted);
        const auto& s = svd.singularValues();
        Eigen::Index geometric = 0;
        for (Eigen::Index k = 0; k < s.size(); ++k) geometric += s(k) < semisimple_tol * std::max(1.0, s(0));
        if (geometric >= cluster) continue;
      }
      best = {d, i, j};
    }
  }
  return best;
}

}  // namespace

double coalescence_gap(const CMatrix& drift, double semisimple_tol) {
  Eigen::ComplexEigenSolver<CMatrix> es(drift, false);
  return closest_pair(drift, es, semisimple_tol).gap;
}

std::vector<ExceptionalPoint> ep_scan(const DriftFamily& family, const std::vector<double>& grid,
                                      const EpScanOptions& options) {
  std::vector<ExceptionalPoint> found;
  if (grid.size() < 3) return found;
  auto gap_at = [&](double p) { return coalescence_gap(family(p), options.semisimple_tol); };
  std::vector<double> g(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) g[k] = gap_at(grid[k]);

  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  for (std::size_t k = 1; k + 1 < grid.size(); ++k) {
    if (!(g[k] <= g[k - 1] && g[k] < g[k + 1])) continue;
    double lo = grid[k - 1], hi = grid[k + 1];
    double c = hi - golden * (hi - lo), d = lo + golden * (hi - lo);
    double gc = gap_at(c), gd = gap_at(d);
    for (int it = 0; it < 200 && (hi - lo) > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
      if (gc < gd) {
        hi = d;
        d = c;
        gd = gc;
        c = hi - golden * (hi - lo);
        gc = gap_at(c);
      } else {
        lo = c;
        c = d;
        gc = gd;
        d = lo + golden * (hi - lo);
        gd = gap_at(d);
      }
    }
    const double p = gc < gd ? c : d;
    const CMatrix a = family(p);
    Eigen::ComplexEigenSolver<CMatrix> es(a, true);
    const ClosestPair cp = closest_pair(a, es, options.semisimple_tol);
    if (cp.i < 0 || cp.gap >= options.gap_tol) continue;
    // Gram determinant of all unit eigenvectors in the coalescing cluster;
    // it vanishes when they fail to span the cluster's invariant subspace.
    const CVector& l = es.eigenvalues();
    const cplx mean = 0.5 * (l(cp.i) + l(cp.j));
    const double scale = std::max(1.0, l.cwiseAbs().maxCoeff());
    std::vector<Eigen::Index> members;
    for (Eigen::Index k = 0; k < l.size(); ++k)
      if (std::abs(l(k) - mean) <= options.gap_tol * scale) members.push_back(k);
    CMatrix vecs = es.eigenvectors()(Eigen::all, members);
    vecs.colwise().normalize();
    const double gram = std::abs((vecs.adjoint() * vecs).determinant());
    if (gram >= options.gram_tol) continue;
    if (!found.empty() && std::abs(found.back().parameter - p) < 1e-9 * std::max(1.0, std::abs(p))) continue;
    found.push_back({p, 0.5 * (es.eigenvalues()(cp.i) + es.eigenvalues()(cp.j)), cp.gap, gram});
  }
  return found;
}

double paramp_critical_pump(double detuning, double kappa_a, double kappa_b) {
  if (kappa_a < 0.0 || kappa_b < 0.0 || kappa_a + kappa_b <= 0.0)
    throw Error(ErrorCode::Domain, "loss rates must be non-negative and not both zero");
  const double kappa = 0.5 * (kappa_a + kappa_b);
  const double dk = 0.5 * (kappa_a - kappa_b);
  const double base = kappa * kappa + detuning * detuning;
  // lambda^2 >= base * (1 - dk^2 / kappa^2)
  return std::sqrt(base * (1.0 - dk * dk / (kappa * kappa)));
}

DimerThresholds dimer_bs_pa_thresholds(double j1, double j2, double kappa) {
  const double s2 = j1 * j1 - j2 * j2;
  if (!(s2 > 0.0)) throw Error(ErrorCode::Domain, "closed forms need j1^2 > j2^2");
  if (!(kappa > 0.0)) throw Error(ErrorCode::Domain, "kappa must be positive");
  const double s = std::sqrt(s2);
  DimerThresholds t;
  t.exceptional_eta = 1.0 - std::sqrt(2.0 / kappa) * std::pow(s2, 0.25);
  t.instability_eta = (std::sqrt(kappa * kappa + s2) - kappa) / s;
  return t;
}

ThreeModeThresholds three_mode_thresholds(double j1, double j2) {
  ThreeModeThresholds t;
  t.bright = j2 != 0.0 ? std::abs(j1 / j2) : std::numeric_limits<double>::infinity();
  t.dark = j1 != 0.0 ? std::abs(j2 / j1) : std::numeric_limits<double>::infinity();
  return t;
}

std::array<cplx, 3> three_mode_cubic_roots(double j1, double j2, double eta) {
  RMatrix companion = RMatrix::Zero(3, 3);
  const double c2 = 1.0 - eta * eta;
  const double c1 = j1 * j1 + j2 * j2;
  const double c0 = j2 * j2 - eta * eta * j1 * j1;
  companion(0, 0) = -c2;
  companion(0, 1) = -c1;
  companion(0, 2) = -c0;
  companion(1, 0) = 1.0;
  companion(2, 1) = 1.0;
  Eigen::EigenSolver<RMatrix> es(companion, false);
  return {es.eigenvalues()(0), es.eigenvalues()(1), es.eigenvalues()(2)};
}

QuadraticSystem uncorrelated_variant(const QuadraticSystem& system) {
  std::vector<JumpOperator> split;
  const Eigen::Index n = system.n_modes();
  for (const auto& j : system.jumps()) {
    const bool has_u = j.u.cwiseAbs().maxCoeff() > 0.0;
    const bool has_v = j.v.cwiseAbs().maxCoeff() > 0.0;
    if (has_u && has_v) {
      split.push_back({j.u, CVector::Zero(n)});
      split.push_back({CVector::Zero(n), j.v});
    } else {
      split.push_back(j);
    }
  }
  return system.with_jumps(std::move(split));
}

std::vector<StabilityGridRow> stability_grid(const std::function<QuadraticSystem(double, double)>& make,
                                             const std::vector<double>& grid1, const std::vector<double>& grid2,
                                             int threads) {
  std::vector<StabilityGridRow> rows(grid1.size() * grid2.size());
  parallel_for(rows.size(), threads, [&](std::size_t k) {
    const double p1 = grid1[k / grid2.size()];
    const double p2 = grid2[k % grid2.size()];
    const SpectrumReport r = system_spectrum(make(p1, p2));
    rows[k] = {p1, p2, r.max_real_part, r.stable};
  });
  return rows;
}

}  // namespace dissipair
