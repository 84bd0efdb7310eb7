#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "dissipair/lattice_models.hpp"

using namespace dissipair;

namespace {

double hermiticity_defect(const CMatrix& h) { return (h - h.adjoint()).norm() / std::max(h.norm(), 1e-300); }

RVector eigenvalues(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

TEST_CASE("three-mode energies and dark mode") {
  const RVector e = eigenvalues(build_three_mode(1.0, 1.0).system.hopping());
  CHECK(std::abs(e(0) + std::sqrt(2.0)) < 1e-12);
  CHECK(std::abs(e(1)) < 1e-12);
  CHECK(std::abs(e(2) - std::sqrt(2.0)) < 1e-12);

  const RVector d = eigenvalues(build_three_mode(1.0, 0.0).system.hopping());
  CHECK(std::abs(d(0) + 1.0) < 1e-12);
  CHECK(std::abs(d(1)) < 1e-12);
  CHECK(std::abs(d(2) - 1.0) < 1e-12);

  const EigenmodeSet m = eigenpairs(build_three_mode(0.75, 1.0).system);
  REQUIRE(m.n_zero() == 1);
  const CVector z = m.zero_modes.col(0);
  CHECK(std::abs(z(0) - cplx(0.8)) < 1e-12);
  CHECK(std::abs(z(1)) < 1e-12);
  CHECK(std::abs(z(2) - cplx(-0.6)) < 1e-12);
  REQUIRE(m.n_pairs() == 1);
  CHECK(std::abs(m.energies(0) - 1.25) < 1e-12);
}

TEST_CASE("SSH chain") {
  SUBCASE("odd topological chain has one edge zero mode") {
    const auto ssh = build_ssh({.n = 99, .alpha = -0.65});
    const EigenmodeSet m = eigenpairs(ssh.system);
    REQUIRE(m.n_zero() == 1);
    const CVector z = m.zero_modes.col(0);
    double odd = 0.0;
    for (Eigen::Index i = 1; i < 99; i += 2) odd = std::max(odd, std::abs(z(i)));
    CHECK(odd < 1e-10);
    const double ratio = std::abs(z(4) / z(0));
    CHECK(std::abs(ratio - std::pow(0.35 / 1.65, 2)) < 1e-10);
    CHECK(std::abs(ratio - 0.045) < 0.02 * 0.045);
  }
  SUBCASE("bond pattern and convention flag") {
    const auto plus = build_ssh({.n = 4, .alpha = 0.3, .hopping = 2.0});
    CHECK(std::abs(plus.system.hopping()(0, 1) - cplx(2.6)) < 1e-15);
    CHECK(std::abs(plus.system.hopping()(1, 2) - cplx(1.4)) < 1e-15);
    const auto minus = build_ssh({.n = 4, .alpha = 0.3, .hopping = 2.0, .convention = BondConvention::Minus});
    CHECK(std::abs(minus.system.hopping()(0, 1) - cplx(1.4)) < 1e-15);
  }
  SUBCASE("uniform chain has no midgap mode") {
    const EigenmodeSet m = eigenpairs(build_ssh({.n = 40, .alpha = 0.0}).system);
    CHECK(m.n_zero() == 0);
    // Smallest level sits at the band-edge spacing scale, not exponentially low.
    CHECK(m.energies.minCoeff() > 0.05);
  }
  SUBCASE("even chain edge splitting decays exponentially") {
    std::vector<double> xs, ys;
    for (Eigen::Index n : {20, 40, 60, 80}) {
      const RVector e = eigenvalues(build_ssh({.n = n, .alpha = -0.3}).system.hopping());
      xs.push_back(static_cast<double>(n));
      ys.push_back(std::log(e.cwiseAbs().minCoeff()));
    }
    const double slope = (ys.back() - ys.front()) / (xs.back() - xs.front());
    CHECK(slope < 0.0);
    CHECK(std::abs(slope - 0.5 * std::log(0.7 / 1.3)) < 0.05 * std::abs(slope));
  }
  SUBCASE("disorder is reproducible and seed dependent") {
    const auto a = build_ssh({.n = 30, .alpha = -0.4, .sigma = 0.2, .seed = 7});
    const auto b = build_ssh({.n = 30, .alpha = -0.4, .sigma = 0.2, .seed = 7});
    const auto c = build_ssh({.n = 30, .alpha = -0.4, .sigma = 0.2, .seed = 8});
    CHECK(a.system.hopping() == b.system.hopping());
    CHECK(a.system.hopping() != c.system.hopping());
  }
  SUBCASE("invalid staggering") { CHECK_THROWS_AS(build_ssh({.n = 10, .alpha = 1.0}), Error); }
}

TEST_CASE("Hofstadter lattice") {
  SUBCASE("4x4 open") {
    const auto h = build_hofstadter(4, 4);
    CHECK(h.system.hopping().rows() == 16);
    CHECK(hermiticity_defect(h.system.hopping()) < 1e-12);
    CHECK(eigenvalues(h.system.hopping()).cwiseAbs().maxCoeff() <= 4.0 + 1e-12);
  }
  SUBCASE("flux audit") {
    for (const auto& model : {build_hofstadter(8, 6), build_hofstadter(8, 6, LatticeKind::SquareCylinder, Axis::X),
                              build_hofstadter(8, 6, LatticeKind::SquareCylinder, Axis::Y)}) {
      for (double f : plaquette_flux(model)) CHECK(std::abs(f - std::numbers::pi / 2) < 1e-12);
    }
    for (double f : plaquette_flux(build_hofstadter(7, 6, LatticeKind::SquareCylinder, Axis::X)))
      CHECK(std::abs(f - std::numbers::pi / 2) < 1e-12);
    // An odd ring along x cannot be two-coloured.
    CHECK_THROWS_AS(check_chiral(build_hofstadter(7, 6, LatticeKind::SquareCylinder, Axis::X).system), Error);
    CHECK(check_chiral(build_hofstadter(6, 6, LatticeKind::SquareCylinder, Axis::X).system).size() == 36);
  }
  SUBCASE("24x24 spectrum is chiral symmetric") {
    const auto h = build_hofstadter(24, 24);
    const RVector sign = check_chiral(h.system);
    for (Eigen::Index x = 0; x < 24; ++x)
      for (Eigen::Index y = 0; y < 24; ++y) CHECK(sign(h.geometry.index(x, y)) == ((x + y) % 2 == 0 ? 1.0 : -1.0));
    const RVector e = eigenvalues(h.system.hopping());
    const RVector flipped = -e.reverse();
    CHECK((e - flipped).cwiseAbs().maxCoeff() < 1e-10);
    const EigenmodeSet m = eigenpairs(h.system);
    CHECK(m.n_pairs() * 2 + m.n_zero() == 576);
    // Residual of the sublattice-flipped partners.
    CHECK((h.system.hopping() * m.negative + m.negative * m.energies.cast<cplx>().asDiagonal()).cwiseAbs().maxCoeff() <
          1e-8);
  }
  SUBCASE("four bands in the density of states") {
    // Gaps of the open lattice show up as empty energy windows in the bulk DOS.
    const RVector e = eigenvalues(build_hofstadter(24, 24).system.hopping());
    std::vector<double> v(e.data(), e.data() + e.size());
    // Count states in the windows around the two quarter-flux gaps; only
    // edge states live there, far fewer than in a band.
    auto count = [&](double lo, double hi) {
      return std::count_if(v.begin(), v.end(), [&](double x) { return x > lo && x < hi; });
    };
    CHECK(count(1.9, 2.4) < count(2.6, 3.1));
    CHECK(count(-2.4, -1.9) < count(-3.1, -2.6));
  }
}

TEST_CASE("chiral check") {
  const auto ssh = build_ssh({.n = 6, .alpha = 0.2});
  const RVector s = check_chiral(ssh.system);
  for (Eigen::Index i = 0; i < 6; ++i) CHECK(s(i) == (i % 2 == 0 ? 1.0 : -1.0));

  CMatrix h = ssh.system.hopping();
  h(1, 3) = h(3, 1) = 0.1;
  try {
    check_chiral(QuadraticSystem(h));
    FAIL("expected a chirality failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotChiral);
    CHECK(std::string(e.what()).find("(1, 3)") != std::string::npos);
  }
}

TEST_CASE("eigenmode pairing invariants") {
  for (const auto& model : {build_ssh({.n = 17, .alpha = -0.4}), build_ssh({.n = 18, .alpha = 0.3}),
                            build_hofstadter(6, 8)}) {
    const EigenmodeSet m = eigenpairs(model.system);
    for (Eigen::Index k = 0; k < m.n_pairs(); ++k) {
      CHECK(std::abs(m.positive.col(k).norm() - 1.0) < 1e-10);
      const CVector flipped = m.sublattice_sign.cast<cplx>().asDiagonal() * m.positive.col(k);
      CHECK((m.negative.col(k) - flipped).cwiseAbs().maxCoeff() < 1e-12);
      Eigen::Index big = 0;
      m.positive.col(k).cwiseAbs().maxCoeff(&big);
      CHECK(std::abs(m.positive(big, k).imag()) < 1e-14);
      CHECK(m.positive(big, k).real() > 0.0);
    }
  }
}

TEST_CASE("cylinder bands") {
  const auto cyl = build_hofstadter(30, 30, LatticeKind::SquareCylinder, Axis::Y);
  const CylinderBands b = cylinder_bands(cyl.geometry);
  CHECK(b.energies.rows() == 30);
  CHECK(std::abs(b.energies.sum()) < 1e-9);

  // Reduced bands reproduce the full cylinder spectrum.
  std::vector<double> all(b.energies.data(), b.energies.data() + b.energies.size());
  std::sort(all.begin(), all.end());
  const RVector full = eigenvalues(cyl.system.hopping());
  double diff = 0.0;
  for (Eigen::Index k = 0; k < full.size(); ++k) diff = std::max(diff, std::abs(full(k) - all[k]));
  CHECK(diff < 1e-9);

  // omega -> -omega under ky -> ky + pi.
  for (Eigen::Index j = 0; j < 30; ++j) {
    const RVector e = b.energies.row(j).transpose();
    const RVector partner = b.energies.row((j + 15) % 30).transpose();
    CHECK((e + partner.reverse()).cwiseAbs().maxCoeff() < 1e-10);
  }

  // Bulk (mid-cylinder) states of the middle bands reach zero energy at the
  // Dirac momenta; bulk states elsewhere stay gapped.
  int near_zero = 0;
  const double eps = 0.25;
  for (Eigen::Index j = 0; j < 30; ++j) {
    bool bulk_zero = false;
    for (Eigen::Index k = 0; k < 30; ++k)
      if (std::abs(b.energies(j, k)) < eps && b.mean_offset(j, k) < 7.5) bulk_zero = true;
    near_zero += bulk_zero;
  }
  CHECK(near_zero >= 4);

  CHECK_THROWS_AS(cylinder_bands(build_hofstadter(8, 8).geometry), Error);
}
