#ifndef DISSIPAIR_LATTICE_MODELS_HPP
#define DISSIPAIR_LATTICE_MODELS_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "dissipair/gaussian_core.hpp"

namespace dissipair {

enum class LatticeKind { Chain, SquareOpen, SquareCylinder };
enum class Axis { X, Y };

/// Site labelling. Square sites (x, y) map to the flat index x * ny + y; a
/// chain of length n is stored as nx = n, ny = 1.
struct LatticeGeometry {
  LatticeKind kind = LatticeKind::Chain;
  Eigen::Index nx = 0;
  Eigen::Index ny = 1;
  Axis periodic_axis = Axis::Y;  // only meaningful for SquareCylinder

  static LatticeGeometry chain(Eigen::Index n);
  static LatticeGeometry square(Eigen::Index nx, Eigen::Index ny);
  static LatticeGeometry cylinder(Eigen::Index nx, Eigen::Index ny, Axis periodic_axis = Axis::Y);

  Eigen::Index size() const { return nx * ny; }
  bool is_square() const { return kind != LatticeKind::Chain; }
  Eigen::Index index(Eigen::Index x, Eigen::Index y = 0) const;
  std::pair<Eigen::Index, Eigen::Index> coords(Eigen::Index site) const;
};

struct LatticeModel {
  LatticeGeometry geometry;
  QuadraticSystem system;
};

/// H = J1 (a^dag b + h.c.) + J2 (b^dag c + h.c.) on modes (a, b, c).
LatticeModel build_three_mode(double j1, double j2);

enum class BondConvention {
  Plus,   // bond i between sites i, i+1: J (1 + (-1)^i alpha) + J_i
  Minus,  // J (1 - (-1)^i alpha) + J_i
};

struct SshParams {
  Eigen::Index n = 2;
  double alpha = 0.0;
  double hopping = 1.0;
  double sigma = 0.0;  // standard deviation of the per-bond disorder J_i
  std::uint64_t seed = 0;
  BondConvention convention = BondConvention::Plus;
};

/// Open SSH chain. With the default convention alpha < 0 leaves weak bonds at
/// both ends (topological for odd and even n).
LatticeModel build_ssh(const SshParams& params);

/// Quarter-flux Hofstadter model with Landau-gauge phase exp(i pi x / 2) on
/// y-bonds. A cylinder wrapping x uses exp(-i pi y / 2) on x-bonds instead,
/// which is consistent for any nx (odd nx breaks the sublattice symmetry).
LatticeModel build_hofstadter(Eigen::Index nx, Eigen::Index ny, LatticeKind kind = LatticeKind::SquareOpen,
                              Axis periodic_axis = Axis::Y);

/// +-1 colouring with H_ij = 0 whenever the colours agree.
/// Throws Error(NotChiral) naming a violating bond.
RVector check_chiral(const QuadraticSystem& system, double tol = 1e-12);

/// Chiral-paired normal modes of the hopping matrix.
///
/// Column k of `positive` has energy energies[k] > 0 and its partner at
/// -energies[k] is column k of `negative`, obtained by the sublattice flip.
/// Zero modes are rotated to be sublattice polarized.
struct EigenmodeSet {
  RVector energies;
  CMatrix positive;
  CMatrix negative;
  CMatrix zero_modes;
  RVector sublattice_sign;
  double scale = 0.0;  // spectral norm of H

  Eigen::Index n_sites() const { return sublattice_sign.size(); }
  Eigen::Index n_pairs() const { return energies.size(); }
  Eigen::Index n_zero() const { return zero_modes.cols(); }
};

/// `degeneracy_tol` is relative to the spectral norm of H.
EigenmodeSet eigenpairs(const QuadraticSystem& system, double degeneracy_tol = 1e-8);

struct CylinderBands {
  RVector ky;
  RMatrix energies;     // (ky index, band)
  RMatrix mean_offset;  // <|x - center|> along the open direction
};

/// Bloch bands of a Hofstadter cylinder that wraps y.
CylinderBands cylinder_bands(const LatticeGeometry& geometry);

/// Flux through each plaquette, as a phase in (-pi, pi]. Row-major over
/// plaquettes with lower-left corner (x, y); wrapped plaquettes included.
std::vector<double> plaquette_flux(const LatticeModel& model);

}  // namespace dissipair

#endif  // DISSIPAIR_LATTICE_MODELS_HPP
