#ifndef DISSIPAIR_STABILITY_HPP
#define DISSIPAIR_STABILITY_HPP

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "dissipair/gaussian_core.hpp"
#include "dissipair/lattice_models.hpp"

namespace dissipair {

struct SpectrumReport {
  CVector eigenvalues;
  double max_real_part = 0.0;
  bool stable = false;
  double dissipative_gap = 0.0;  // slowest nonzero relaxation rate
  double tolerance = 0.0;        // marginality threshold actually used
};

/// Dense eigensolve of a drift matrix. Eigenvalues with |Re| at or below
/// rel_tol * spectral radius count as marginal: they do not break stability
/// and are excluded from the gap.
SpectrumReport spectrum(const BdgMatrix& drift, double rel_tol = 1e-10);
SpectrumReport spectrum(const RMatrix& quadrature_drift, double rel_tol = 1e-10);

/// Spectrum of the real quadrature drift of a system.
SpectrumReport system_spectrum(const QuadraticSystem& system, double rel_tol = 1e-10);

enum class BoundaryMethod { Bisection, ClosedForm, Fgr };

struct StabilityBoundary {
  std::string parameter = "eta";
  double critical = 0.0;
  double low = 0.0;  // final bracket
  double high = 0.0;
  BoundaryMethod method = BoundaryMethod::Bisection;
  int iterations = 0;
};

using SystemFamily = std::function<QuadraticSystem(double)>;

/// Bisects max Re eig of family(p) between a stable `low` and an unstable
/// `high` until the bracket is below rel_tol * |high| (at most 200 steps).
/// Throws Error(InvalidArgument) when the endpoints do not straddle.
StabilityBoundary eta_critical_spectral(const SystemFamily& family, double low, double high,
                                        double rel_tol = 1e-8, const std::string& parameter = "eta");

/// min over modes of |psi[cooling] / psi[heating]|, skipping modes with
/// |psi[heating]| < 1e-14. Both sites must lie on the same sublattice.
StabilityBoundary eta_critical_wavefunction(const EigenmodeSet& modes, Eigen::Index cooling_site,
                                            Eigen::Index heating_site);

/// Per-mode first-order relaxation rate -Re <psi| A_dissipative |psi>, summed
/// over jumps; negative means the mode is heated.
struct FgrRates {
  RVector pairs;  // one per positive-energy mode (its partner shares the rate)
  RVector zero_modes;
};
FgrRates fgr_rates(const EigenmodeSet& modes, const std::vector<JumpOperator>& jumps);

struct ExceptionalPoint {
  double parameter = 0.0;
  cplx eigenvalue;
  double gap = 0.0;              // |lambda_1 - lambda_2| at the refined point
  double gram_determinant = 0.0;  // of the unit eigenvectors in the coalescing cluster
};

struct EpScanOptions {
  double gap_tol = 1e-6;
  double gram_tol = 1e-6;
  double semisimple_tol = 1e-9;  // relative; pairs spanning a 2D eigenspace are ignored
};

using DriftFamily = std::function<CMatrix(double)>;

/// Coalescence scan: local minima of the smallest non-semisimple eigenvalue
/// spacing on `grid` are refined by golden-section search and kept when both
/// the spacing and the eigenvector Gram determinant fall below tolerance.
std::vector<ExceptionalPoint> ep_scan(const DriftFamily& family, const std::vector<double>& grid,
                                      const EpScanOptions& options = {});

/// Smallest spacing between eigenvalues that do not share a 2D eigenspace,
/// relative to max(1, spectral radius). Exposed for diagnostics.
double coalescence_gap(const CMatrix& drift, double semisimple_tol = 1e-9);

/// Two modes with H = detuning (a^dag a + b^dag b) + pump (a^dag b^dag + h.c.)
/// and amplitude damping rates kappa_a, kappa_b (jumps sqrt(2 kappa) a).
/// Returns the pump strength at which the instability sets in.
double paramp_critical_pump(double detuning, double kappa_a, double kappa_b);

/// H = j1 (a^dag b + h.c.) + j2 (a^dag b^dag + h.c.), L = sqrt(2 kappa)(a + eta b^dag).
struct DimerThresholds {
  double exceptional_eta = 0.0;  // EP on the eta >= 0 side
  double instability_eta = 0.0;  // closed-form onset of instability
};
/// Throws Error(Domain) unless j1^2 > j2^2.
DimerThresholds dimer_bs_pa_thresholds(double j1, double j2, double kappa);

struct ThreeModeThresholds {
  double bright = 0.0;  // |j1 / j2|
  double dark = 0.0;    // |j2 / j1|
  double critical() const { return std::min(bright, dark); }
};
ThreeModeThresholds three_mode_thresholds(double j1, double j2);

/// Roots of x^3 + (1 - eta^2) x^2 + (j1^2 + j2^2) x + (j2^2 - eta^2 j1^2) = 0,
/// the reduced-block eigenvalues at kappa = 2.
std::array<cplx, 3> three_mode_cubic_roots(double j1, double j2, double eta);

/// Replaces each two-sided jump sqrt(k)(a_i + eta a_j^dag) with independent
/// loss sqrt(k) a_i and gain eta sqrt(k) a_j^dag.
QuadraticSystem uncorrelated_variant(const QuadraticSystem& system);

struct StabilityGridRow {
  double param1 = 0.0;
  double param2 = 0.0;
  double max_real_part = 0.0;
  bool stable = false;
};
/// Evaluates `make(p1, p2)` on the outer product of the two grids, p1 major.
std::vector<StabilityGridRow> stability_grid(const std::function<QuadraticSystem(double, double)>& make,
                                             const std::vector<double>& grid1,
                                             const std::vector<double>& grid2, int threads = 1);

}  // namespace dissipair

#endif  // DISSIPAIR_STABILITY_HPP
