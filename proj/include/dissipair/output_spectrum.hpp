#ifndef DISSIPAIR_OUTPUT_SPECTRUM_HPP
#define DISSIPAIR_OUTPUT_SPECTRUM_HPP

#include <vector>

#include "dissipair/gaussian_core.hpp"

namespace dissipair {

/// Lattice with the pairing dissipator realized by a lossy ancilla b,
/// H_I = g (a_c + eta a_h^dag) b^dag + h.c., and one site tapped by a
/// waveguide at rate `output_rate`.
struct IoSetup {
  QuadraticSystem lattice;
  Eigen::Index cooling_site = 2;
  Eigen::Index heating_site = 0;
  double coupling = 4.0;       // g
  double ancilla_loss = 10.0;  // kappa
  Eigen::Index output_site = 0;
  double output_rate = 1e-3;   // Gamma
  double eta = 0.0;
};

/// Extended N+1 mode system; the ancilla is the last mode. Channel 0 is the
/// waveguide, channel 1 the ancilla bath. Each input enters as
/// da/dt = ... - sqrt(rate) xi_in, and a_out = a_in + sqrt(Gamma) a_out_site.
struct IoSystem {
  QuadraticSystem system;
  BdgMatrix drift;
  CMatrix input;   // 2(N+1) x 4, columns (xi_0, xi_1, xi_0^dag, xi_1^dag)
  CMatrix output;  // 2 x 2(N+1), rows (a_out, a_out^dag), state part only
  Eigen::Index ancilla = 0;
};

/// Throws Error(InvalidArgument) on bad indices or non-positive rates and
/// Error(Unstable) when the extended drift is not stable. Warns when
/// Gamma >= kappa.
IoSystem build_io_system(const IoSetup& setup);

/// Unchecked variant, used for threshold scans.
IoSystem assemble_io_system(const IoSetup& setup);

struct QuadratureSpectrum {
  double squeezed = 1.0;      // P, vacuum = 1
  double antisqueezed = 1.0;
  double theta = 0.0;         // minimizing quadrature angle in [0, pi)
};

struct SqueezeSpectrumResult {
  std::vector<double> omega;
  std::vector<double> squeezed;
  std::vector<double> antisqueezed;
  std::vector<double> theta;
};

/// Symmetrized output quadrature spectral matrix in the (cos theta, sin theta)
/// basis of q = e^{i theta} a_out + e^{-i theta} a_out^dag; vacuum = identity.
RMatrix output_spectral_matrix(const IoSystem& io, double omega);

/// Output quadrature noise at one frequency from the 2x2 spectral matrix.
QuadratureSpectrum output_quadrature_spectrum(const IoSystem& io, double omega);

/// 801 points on [-extent, extent], log-dense near zero (includes 0).
std::vector<double> default_frequency_grid(double extent = 5.0, int points = 801);

SqueezeSpectrumResult squeezing_spectrum(const IoSetup& setup, const std::vector<double>& omega,
                                         int threads = 1);

/// Smallest eta at which the extended system loses stability, by bisection
/// on [0, high].
double io_eta_critical(const IoSetup& setup, double high, double rel_tol = 1e-9);

struct EtaOptimum {
  double eta = 0.0;
  double p0 = 1.0;
  double eta_critical = 0.0;
  bool flat = false;  // objective varies by less than 1e-12 over the bracket
};

/// Golden-section minimization of P(0) over eta in [low, high]. Throws
/// Error(Unstable) when the bracket reaches the instability.
EtaOptimum eta_opt_search(const IoSetup& setup, double low, double high, double tol = 1e-7);

struct EtaSweepRow {
  double eta = 0.0;
  double p0 = 1.0;
  bool stable = false;
};
std::vector<EtaSweepRow> eta_sweep(const IoSetup& setup, const std::vector<double>& etas, int threads = 1);

}  // namespace dissipair

#endif  // DISSIPAIR_OUTPUT_SPECTRUM_HPP
