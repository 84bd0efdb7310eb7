#include "dissipair/lattice_models.hpp"

#include <cmath>
#include <numbers>
#include <queue>
#include <random>
#include <sstream>

namespace dissipair {

LatticeGeometry LatticeGeometry::chain(Eigen::Index n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "chain length must be positive");
  return LatticeGeometry{LatticeKind::Chain, n, 1, Axis::Y};
}

LatticeGeometry LatticeGeometry::square(Eigen::Index nx, Eigen::Index ny) {
  if (nx < 1 || ny < 1) throw Error(ErrorCode::InvalidArgument, "lattice dimensions must be positive");
  return LatticeGeometry{LatticeKind::SquareOpen, nx, ny, Axis::Y};
}

LatticeGeometry LatticeGeometry::cylinder(Eigen::Index nx, Eigen::Index ny, Axis periodic_axis) {
  if (nx < 1 || ny < 1) throw Error(ErrorCode::InvalidArgument, "lattice dimensions must be positive");
  return LatticeGeometry{LatticeKind::SquareCylinder, nx, ny, periodic_axis};
}

Eigen::Index LatticeGeometry::index(Eigen::Index x, Eigen::Index y) const {
  if (x < 0 || x >= nx || y < 0 || y >= ny) {
    std::ostringstream os;
    os << "site (" << x << ", " << y << ") outside " << nx << " x " << ny << " lattice";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  return x * ny + y;
}

std::pair<Eigen::Index, Eigen::Index> LatticeGeometry::coords(Eigen::Index site) const {
  if (site < 0 || site >= size()) throw Error(ErrorCode::InvalidArgument, "site index out of range");
  return {site / ny, site % ny};
}

LatticeModel build_three_mode(double j1, double j2) {
  CMatrix h = CMatrix::Zero(3, 3);
  h(0, 1) = h(1, 0) = j1;
  h(1, 2) = h(2, 1) = j2;
  return {LatticeGeometry::chain(3), QuadraticSystem(h)};
}

LatticeModel build_ssh(const SshParams& p) {
  if (p.n < 2) throw Error(ErrorCode::InvalidArgument, "SSH chain needs at least two sites");
  if (!(std::abs(p.alpha) < 1.0)) throw Error(ErrorCode::Domain, "SSH staggering requires |alpha| < 1");
  if (p.sigma < 0.0) throw Error(ErrorCode::InvalidArgument, "disorder strength must be non-negative");

  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double sign = p.convention == BondConvention::Plus ? 1.0 : -1.0;
  CMatrix h = CMatrix::Zero(p.n, p.n);
  for (Eigen::Index i = 0; i + 1 < p.n; ++i) {
    const double stagger = (i % 2 == 0) ? 1.0 : -1.0;
    double bond = p.hopping * (1.0 + sign * stagger * p.alpha);
    if (p.sigma > 0.0) bond += p.sigma * noise(rng);
    h(i, i + 1) = h(i + 1, i) = bond;
  }
  return {LatticeGeometry::chain(p.n), QuadraticSystem(h)};
}

LatticeModel build_hofstadter(Eigen::Index nx, Eigen::Index ny, LatticeKind kind, Axis periodic_axis) {
  if (nx < 4 || ny < 4) throw Error(ErrorCode::InvalidArgument, "Hofstadter lattice needs nx, ny >= 4");
  if (kind == LatticeKind::Chain) throw Error(ErrorCode::InvalidArgument, "Hofstadter model needs a square geometry");
  const bool cyl = kind == LatticeKind::SquareCylinder;

  const LatticeGeometry g = cyl ? LatticeGeometry::cylinder(nx, ny, periodic_axis) : LatticeGeometry::square(nx, ny);
  CMatrix h = CMatrix::Zero(g.size(), g.size());
  auto bond = [&h](Eigen::Index i, Eigen::Index j, cplx t) {
    h(i, j) += t;
    h(j, i) += std::conj(t);
  };
  auto quarter = [](Eigen::Index k) { return std::polar(1.0, std::numbers::pi * static_cast<double>(k % 4) / 2.0); };
  // Wrapping x keeps the phases on x-bonds so that any nx is gauge consistent.
  const bool x_gauge = cyl && periodic_axis == Axis::X;
  for (Eigen::Index x = 0; x < nx; ++x) {
    for (Eigen::Index y = 0; y < ny; ++y) {
      const Eigen::Index s = g.index(x, y);
      const cplx x_phase = x_gauge ? std::conj(quarter(y)) : cplx(1.0);
      const cplx y_phase = x_gauge ? cplx(1.0) : quarter(x);
      if (x + 1 < nx) bond(s, g.index(x + 1, y), x_phase);
      else if (x_gauge) bond(s, g.index(0, y), x_phase);
      if (y + 1 < ny) bond(s, g.index(x, y + 1), y_phase);
      else if (cyl && periodic_axis == Axis::Y) bond(s, g.index(x, 0), y_phase);
    }
  }
  return {g, QuadraticSystem(h)};
}

RVector check_chiral(const QuadraticSystem& system, double tol) {
  const CMatrix& h = system.hopping();
  const Eigen::Index n = h.rows();
  const double cut = tol * std::max(h.cwiseAbs().maxCoeff(), 1e-300);
  auto fail = [](Eigen::Index i, Eigen::Index j) {
    std::ostringstream os;
    os << "hopping graph is not bipartite: bond (" << i << ", " << j << ") joins equal colours";
    throw Error(ErrorCode::NotChiral, os.str());
  };
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(h(i, i)) > cut) fail(i, i);

  // Colour along a maximum-weight spanning forest so that a violation is
  // blamed on the weakest bond of the offending cycle.
  RVector colour = RVector::Zero(n);
  using Item = std::pair<double, std::pair<Eigen::Index, Eigen::Index>>;  // (|H|, (from, to))
  for (Eigen::Index start = 0; start < n; ++start) {
    if (colour(start) != 0.0) continue;
    colour(start) = (start % 2 == 0) ? 1.0 : -1.0;
    std::priority_queue<Item> frontier;
    auto expand = [&](Eigen::Index i) {
      for (Eigen::Index j = 0; j < n; ++j)
        if (j != i && colour(j) == 0.0 && std::abs(h(i, j)) > cut) frontier.push({std::abs(h(i, j)), {i, j}});
    };
    expand(start);
    while (!frontier.empty()) {
      const auto [from, to] = frontier.top().second;
      frontier.pop();
      if (colour(to) != 0.0) continue;
      colour(to) = -colour(from);
      expand(to);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (std::abs(h(i, j)) > cut && colour(i) == colour(j)) fail(i, j);
  return colour;
}

namespace {

void fix_phase(Eigen::Ref<CVector> v) {
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  const double mag = std::abs(v(k));
  if (mag > 0.0) v *= std::conj(v(k)) / mag;
}

}  // namespace

EigenmodeSet eigenpairs(const QuadraticSystem& system, double degeneracy_tol) {
  EigenmodeSet out;
  out.sublattice_sign = check_chiral(system);
  const Eigen::Index n = system.n_modes();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(system.hopping());
  if (es.info() != Eigen::Success) throw Error(ErrorCode::Numerical, "Hamiltonian eigensolver did not converge");
  const RVector& e = es.eigenvalues();
  out.scale = e.cwiseAbs().maxCoeff();
  const double cut = degeneracy_tol * std::max(out.scale, 1e-300);

  std::vector<Eigen::Index> pos, zero;
  Eigen::Index n_neg = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (e(k) > cut) pos.push_back(k);
    else if (e(k) < -cut) ++n_neg;
    else zero.push_back(k);
  }
  if (static_cast<Eigen::Index>(pos.size()) != n_neg)
    throw Error(ErrorCode::NotChiral, "spectrum is not symmetric about zero");

  const auto& s = out.sublattice_sign;
  out.energies.resize(static_cast<Eigen::Index>(pos.size()));
  out.positive.resize(n, out.energies.size());
  out.negative.resize(n, out.energies.size());
  for (Eigen::Index k = 0; k < out.energies.size(); ++k) {
    CVector v = es.eigenvectors().col(pos[k]);
    fix_phase(v);
    out.energies(k) = e(pos[k]);
    out.positive.col(k) = v;
    out.negative.col(k) = s.cast<cplx>().asDiagonal() * v;
  }
  const double residual = (system.hopping() * out.negative + out.negative * out.energies.cast<cplx>().asDiagonal())
                              .cwiseAbs()
                              .maxCoeff();
  if (residual > 1e-8 * std::max(out.scale, 1.0))
    throw Error(ErrorCode::NotChiral, "sublattice flip does not map +e modes to -e modes");

  // Sublattice-polarize the zero-energy subspace.
  CMatrix z(n, static_cast<Eigen::Index>(zero.size()));
  for (Eigen::Index k = 0; k < z.cols(); ++k) z.col(k) = es.eigenvectors().col(zero[k]);
  if (z.cols() > 0) {
    const CMatrix m = z.adjoint() * s.cast<cplx>().asDiagonal() * z;
    Eigen::SelfAdjointEigenSolver<CMatrix> ps(0.5 * (m + m.adjoint()));
    z = z * ps.eigenvectors();
    for (Eigen::Index k = 0; k < z.cols(); ++k) {
      z.col(k).normalize();
      fix_phase(z.col(k));
    }
  }
  out.zero_modes = z;
  return out;
}

CylinderBands cylinder_bands(const LatticeGeometry& g) {
  if (g.kind != LatticeKind::SquareCylinder || g.periodic_axis != Axis::Y)
    throw Error(ErrorCode::InvalidArgument, "band structure needs a cylinder periodic in y");
  CylinderBands out;
  out.ky.resize(g.ny);
  out.energies.resize(g.ny, g.nx);
  out.mean_offset.resize(g.ny, g.nx);
  const double center = 0.5 * static_cast<double>(g.nx - 1);
  for (Eigen::Index j = 0; j < g.ny; ++j) {
    const double k = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(g.ny);
    out.ky(j) = k;
    RMatrix h = RMatrix::Zero(g.nx, g.nx);
    for (Eigen::Index x = 0; x < g.nx; ++x) {
      h(x, x) = 2.0 * std::cos(k + std::numbers::pi * static_cast<double>(x % 4) / 2.0);
      if (x + 1 < g.nx) h(x, x + 1) = h(x + 1, x) = 1.0;
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> es(h);
    out.energies.row(j) = es.eigenvalues().transpose();
    for (Eigen::Index b = 0; b < g.nx; ++b) {
      double d = 0.0;
      for (Eigen::Index x = 0; x < g.nx; ++x)
        d += es.eigenvectors()(x, b) * es.eigenvectors()(x, b) * std::abs(static_cast<double>(x) - center);
      out.mean_offset(j, b) = d;
    }
  }
  return out;
}

std::vector<double> plaquette_flux(const LatticeModel& model) {
  const auto& g = model.geometry;
  if (!g.is_square()) throw Error(ErrorCode::InvalidArgument, "plaquettes need a square geometry");
  const CMatrix& h = model.system.hopping();
  const bool wrap_x = g.kind == LatticeKind::SquareCylinder && g.periodic_axis == Axis::X;
  const bool wrap_y = g.kind == LatticeKind::SquareCylinder && g.periodic_axis == Axis::Y;
  const Eigen::Index px = wrap_x ? g.nx : g.nx - 1;
  const Eigen::Index py = wrap_y ? g.ny : g.ny - 1;
  std::vector<double> flux;
  flux.reserve(static_cast<std::size_t>(px * py));
  for (Eigen::Index x = 0; x < px; ++x) {
    for (Eigen::Index y = 0; y < py; ++y) {
      const Eigen::Index a = g.index(x, y);
      const Eigen::Index b = g.index((x + 1) % g.nx, y);
      const Eigen::Index c = g.index((x + 1) % g.nx, (y + 1) % g.ny);
      const Eigen::Index d = g.index(x, (y + 1) % g.ny);
      flux.push_back(std::arg(h(a, b) * h(b, c) * h(c, d) * h(d, a)));
    }
  }
  return flux;
}

}  // namespace dissipair
