#ifndef DISSIPAIR_STEADY_STATE_HPP
#define DISSIPAIR_STEADY_STATE_HPP

#include <functional>
#include <vector>

#include "dissipair/gaussian_core.hpp"
#include "dissipair/lattice_models.hpp"

namespace dissipair {

/// Squeezing of one normal-mode pair (or a self-paired zero mode):
/// tanh r = |t|, phase = arg t with t the heating/cooling amplitude ratio.
struct ModeSqueeze {
  double energy = 0.0;
  double r = 0.0;
  double phase = 0.0;  // in [0, 2 pi)
  cplx weight;         // N with |N|^2 = |psi[cooling]|^2 (1 - tanh^2 r)
};

struct SqueezeParameters {
  std::vector<ModeSqueeze> pairs;
  std::vector<ModeSqueeze> zero_modes;
};

struct SteadyState {
  CovarianceState covariance;
  SqueezeParameters squeeze;
};

struct BogoliubovOptions {
  double nonunique_tol = 1e-10;  // relative level spacing treated as degenerate
  double warn_tol = 1e-6;        // relative level spacing that triggers a warning
  bool warn = true;
};

/// Pure steady state of a chiral lattice with one jump of the form
/// sqrt(k)(a_c + eta a_h^dag), built mode pair by mode pair.
///
/// Throws Error(Unstable) when some mode is heated faster than cooled and
/// Error(NonUnique) on degenerate or undamped modes.
SteadyState bogoliubov_steady_state(const EigenmodeSet& modes, const JumpOperator& jump,
                                    const BogoliubovOptions& options = {});

/// Steady state from A_q V + V A_q^T + D_q = 0.
CovarianceState lyapunov_steady_state(const QuadraticSystem& system);

struct ObservableSet {
  RVector density;  // <a_i^dag a_i>
  CMatrix number;   // <a_i^dag a_j>
  CMatrix pairing;  // <a_i a_j>
  double total = 0.0;
  double purity = 1.0;
};

/// Throws Error(Domain) when V violates the uncertainty relation.
ObservableSet observables(const CovarianceState& state);

/// Adds sqrt(k)(a_{N-1-c} - eta a_{N-1-h}^dag), the mirror image of the
/// given jump. Requires even N and H invariant under i -> N-1-i.
QuadraticSystem mirrored_dissipator(const QuadraticSystem& system, const JumpOperator& jump);

struct ComparatorResult {
  bool stable = false;
  double max_real_part = 0.0;
  bool has_state = false;
  ObservableSet observables;
};

/// Two jumps sqrt(k)(a_s0 + eta a_s1^dag) and sqrt(k)(a_s1 + eta a_s0^dag).
QuadraticSystem squeezed_noise_system(const QuadraticSystem& system, Eigen::Index site0, Eigen::Index site1,
                                      double kappa, double eta);

/// Stability of the two-jump system and, when a unique steady state exists,
/// its observables.
ComparatorResult squeezed_noise_comparator(const QuadraticSystem& system, Eigen::Index site0, Eigen::Index site1,
                                           double kappa, double eta);

struct GapRow {
  Eigen::Index size = 0;
  double gap = 0.0;
  bool stable = false;
};

/// Dissipative gap of family(n) for each n.
std::vector<GapRow> dissipative_gap_vs_size(const std::function<QuadraticSystem(Eigen::Index)>& family,
                                            const std::vector<Eigen::Index>& sizes, int threads = 1);

}  // namespace dissipair

#endif  // DISSIPAIR_STEADY_STATE_HPP
