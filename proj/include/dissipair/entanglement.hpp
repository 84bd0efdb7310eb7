#ifndef DISSIPAIR_ENTANGLEMENT_HPP
#define DISSIPAIR_ENTANGLEMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dissipair/gaussian_core.hpp"
#include "dissipair/lattice_models.hpp"
#include "dissipair/steady_state.hpp"

namespace dissipair {

struct Bipartition {
  std::vector<Eigen::Index> members;  // side A, ascending
  double angle = 0.0;                 // cut angle for line cuts, 0 otherwise
};

/// Von Neumann entropy (nats) of the reduced state on `modes`. Symplectic
/// eigenvalues within 1e-9 below 1/2 are clamped; lower values throw
/// Error(Domain).
double entanglement_entropy(const CovarianceState& state, const std::vector<Eigen::Index>& modes);
double entanglement_entropy(const CovarianceState& state, const Bipartition& part);

/// S(A) + S(B) - S(A u B) for disjoint A and B.
double mutual_information(const CovarianceState& state, const std::vector<Eigen::Index>& a,
                          const std::vector<Eigen::Index>& b);

/// Complement of `modes` in [0, n).
std::vector<Eigen::Index> complement(const std::vector<Eigen::Index>& modes, Eigen::Index n);

/// `count` cuts through the lattice centre at angles pi i / count. Side A
/// holds sites with non-negative signed distance (-sin t, cos t) . (r - c),
/// ties within 1e-12 included.
std::vector<Bipartition> angled_bipartitions(const LatticeGeometry& geometry, int count);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
};
/// Least squares y = slope x + intercept. Needs >= 3 points and distinct x.
LinearFit volume_law_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Symmetrized edge localization factor of a chain density profile:
/// (1/n) sum_i sqrt(n_i n_{N-1-i}) (1 - 4 i (N - i) / N^2).
double edge_localization(const RVector& density);

struct DisorderPoint {
  double alpha = 0.0;
  double sigma = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  int used = 0;
  int skipped = 0;
  bool flagged = false;  // more than half of the realizations skipped
};

struct DisorderSweepResult {
  std::vector<DisorderPoint> points;  // alpha major, sigma minor
  int realizations = 0;
  std::uint64_t seed = 0;
};

struct DisorderSweepSpec {
  SshParams chain;  // n, hopping and convention; alpha/sigma/seed overridden
  Eigen::Index cooling_site = 2;
  Eigen::Index heating_site = 0;
  double kappa = 1.0;
  double eta_ratio = 0.99;  // eta = eta_ratio * eta_c of each realization
  std::vector<double> alphas;
  std::vector<double> sigmas;
  int realizations = 100;
  std::uint64_t seed = 0;
};

/// Mean edge localization over seeded disorder realizations. Realizations
/// that are unstable or non-unique at eta_ratio * eta_c are skipped.
DisorderSweepResult disorder_sweep(const DisorderSweepSpec& spec, int threads = 1);

/// Seed of realization `index` derived from a master seed (SplitMix64).
std::uint64_t realization_seed(std::uint64_t master, std::uint64_t index);

/// sigma where mean S first crosses 0.5, by linear interpolation between grid
/// points of one alpha; empty if it never crosses.
std::optional<double> crossover_sigma(const DisorderSweepResult& result, double alpha);

/// Clockwise spiral from the top-left corner inwards. Rows count down from
/// the top edge (row = ny - 1 - y), columns are x. Square lattices only.
std::vector<Eigen::Index> spiral_order(const LatticeGeometry& geometry);

enum class PathKind { Row, Column, EdgeWalk };

struct LinePath {
  PathKind kind = PathKind::Row;
  Eigen::Index index = 0;  // y for rows, x for columns
};

struct LineCutRow {
  Eigen::Index step = 0;
  Eigen::Index site = 0;
  Eigen::Index x = 0;
  Eigen::Index y = 0;
  double density = 0.0;
  double number_corr = 0.0;   // |<a_ref^dag a_site>|
  double pairing_corr = 0.0;  // |<a_ref a_site>|
};

/// Density and correlations with `reference` along a path.
std::vector<LineCutRow> line_cut(const ObservableSet& obs, const LatticeGeometry& geometry, const LinePath& path,
                                 Eigen::Index reference);

}  // namespace dissipair

#endif  // DISSIPAIR_ENTANGLEMENT_HPP
