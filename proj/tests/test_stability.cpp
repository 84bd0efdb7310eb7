#include <cmath>
#include <random>

#include "doctest.h"
#include "dissipair/lattice_models.hpp"
#include "dissipair/stability.hpp"
#include "support.hpp"

using namespace dissipair;

namespace {

QuadraticSystem three_mode(double j1, double j2, double kappa, double eta) {
  return build_three_mode(j1, j2).system.with_jump(JumpOperator::pairing(3, 0, 2, kappa, eta));
}

QuadraticSystem dimer(double j1, double j2, double kappa, double eta, bool correlated = true) {
  CMatrix h = CMatrix::Zero(2, 2), k = CMatrix::Zero(2, 2);
  h(0, 1) = h(1, 0) = j1;
  k(0, 1) = k(1, 0) = j2;
  const QuadraticSystem s(h, {JumpOperator::pairing(2, 0, 1, 2.0 * kappa, eta)}, k);
  return correlated ? s : uncorrelated_variant(s);
}

}  // namespace

TEST_CASE("spectrum of elementary drifts") {
  const QuadraticSystem loss(CMatrix::Zero(1, 1), {JumpOperator::loss(1, 0, 0.6)});
  const SpectrumReport r = system_spectrum(loss);
  CHECK(r.stable);
  CHECK(std::abs(r.max_real_part + 0.3) < 1e-14);
  CHECK(std::abs(r.dissipative_gap - 0.3) < 1e-14);

  SUBCASE("parametric amplifier with one-sided loss is always unstable") {
    const double delta = 0.7, lambda = 0.2, kappa = 1.0;
    CMatrix h = delta * CMatrix::Identity(2, 2), k = CMatrix::Zero(2, 2);
    k(0, 1) = k(1, 0) = lambda;
    const QuadraticSystem p(h, {JumpOperator::loss(2, 0, kappa)}, k);
    const SpectrumReport s = spectrum(build_drift(p));
    CHECK_FALSE(s.stable);
    // Closed form -kappa/4 +- i sqrt((delta - i kappa/4)^2 - lambda^2) for amplitude rate kappa/2.
    const cplx root = std::sqrt(std::pow(cplx(delta, -kappa / 4), 2) - lambda * lambda);
    const double expect = std::max((-kappa / 4 + kI * root).real(), (-kappa / 4 - kI * root).real());
    CHECK(std::abs(s.max_real_part - expect) < 1e-12);
  }
}

TEST_CASE("three-mode critical imbalance by bisection") {
  for (double kappa : {0.1, 1.0, 10.0}) {
    const auto b = eta_critical_spectral([&](double e) { return three_mode(0.75, 1.0, kappa, e); }, 0.0, 0.99);
    CHECK(std::abs(b.critical - 0.75) < 1e-6);
    CHECK(b.iterations <= 200);
  }
  CHECK_FALSE(system_spectrum(three_mode(0.75, 1.0, 1.0, 0.76)).stable);
  CHECK(system_spectrum(three_mode(0.75, 1.0, 1.0, 0.74)).stable);
  CHECK_THROWS_AS(eta_critical_spectral([&](double e) { return three_mode(0.75, 1.0, 1.0, e); }, 0.8, 0.9), Error);
}

TEST_CASE("three-mode cubic matches the reduced block") {
  for (double eta : {0.0, 0.3, 0.9}) {
    const auto roots = three_mode_cubic_roots(0.6, 1.1, eta);
    const RMatrix aq = quadrature_drift(three_mode(0.6, 1.1, 2.0, eta));
    const std::vector<Eigen::Index> idx{0, 4, 2};
    Eigen::EigenSolver<RMatrix> es(aq(idx, idx), false);
    for (const cplx& x : roots) {
      double best = 1e9;
      for (Eigen::Index k = 0; k < 3; ++k) best = std::min(best, std::abs(es.eigenvalues()(k) - x));
      CHECK(best < 1e-10);
    }
  }
  const auto t = three_mode_thresholds(0.5, 1.0);
  CHECK(t.bright == doctest::Approx(0.5));
  CHECK(t.dark == doctest::Approx(2.0));
  CHECK(system_spectrum(three_mode(0.5, 1.0, 1.0, 0.0)).stable);
}

TEST_CASE("wavefunction threshold agrees with bisection on random chains") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 3 + trial % 8;
    const QuadraticSystem h = testing::random_chiral_chain(rng, n, trial % 2 == 1);
    const Eigen::Index c = (trial % 3 == 0) ? 0 : 2 * ((trial / 3) % ((n + 1) / 2));
    const Eigen::Index hs = (c == 0) ? 2 * ((n - 1) / 2) : 0;
    const EigenmodeSet m = eigenpairs(h);
    const double wf = eta_critical_wavefunction(m, c, hs).critical;
    const auto family = [&](double e) { return h.with_jump(JumpOperator::pairing(n, c, hs, 1.0, e)); };
    const auto b = eta_critical_spectral(family, 0.0, 1.5 * wf + 0.1);
    CHECK(std::abs(b.critical - wf) < 1e-6 * std::max(1.0, wf));
  }
}

TEST_CASE("threshold does not depend on kappa") {
  const auto h = build_ssh({.n = 15, .alpha = -0.3});
  std::vector<double> etas;
  for (double kappa : {0.1, 1.0, 10.0}) {
    auto f = [&](double e) { return h.system.with_jump(JumpOperator::pairing(15, 4, 0, kappa, e)); };
    etas.push_back(eta_critical_spectral(f, 0.0, 1.0).critical);
  }
  CHECK(std::abs(etas[0] - etas[1]) < 1e-6);
  CHECK(std::abs(etas[2] - etas[1]) < 1e-6);
  CHECK(std::abs(etas[1] - std::pow(0.7 / 1.3, 2)) < 1e-6);
}

TEST_CASE("wavefunction threshold rejects mixed sublattices") {
  const EigenmodeSet m = eigenpairs(build_ssh({.n = 9, .alpha = -0.3}).system);
  CHECK_THROWS_AS(eta_critical_wavefunction(m, 1, 0), Error);
}

TEST_CASE("three-mode FGR rates") {
  const double j1 = 0.6, j2 = 1.1, kappa = 1.0;
  const double jsq = j1 * j1 + j2 * j2;
  const EigenmodeSet m = eigenpairs(build_three_mode(j1, j2).system);
  for (double eta : {0.0, 0.3, j1 / j2}) {
    const FgrRates r = fgr_rates(m, {JumpOperator::pairing(3, 0, 2, kappa, eta)});
    CHECK(r.pairs(0) == doctest::Approx(kappa * (j1 * j1 - eta * eta * j2 * j2) / (4 * jsq)).epsilon(1e-12));
    CHECK(r.zero_modes(0) == doctest::Approx(kappa * (j2 * j2 - eta * eta * j1 * j1) / (2 * jsq)).epsilon(1e-12));
  }
  const FgrRates at_dark = fgr_rates(m, {JumpOperator::pairing(3, 0, 2, kappa, j2 / j1)});
  CHECK(std::abs(at_dark.zero_modes(0)) < 1e-14);
}

TEST_CASE("FGR rates match the weak-dissipation slope of the exact spectrum") {
  std::mt19937_64 rng(99);
  const double kappa = 1e-4;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 4 + trial % 5;
    const QuadraticSystem h = testing::random_chiral_chain(rng, n);
    const EigenmodeSet m = eigenpairs(h);
    const JumpOperator l = JumpOperator::pairing(n, 0, 2, kappa, 0.4);
    const FgrRates r = fgr_rates(m, {l});
    const SpectrumReport s = spectrum(build_drift(h.with_jump(l)));
    for (Eigen::Index k = 0; k < m.n_pairs(); ++k) {
      // Drift eigenvalues near -i e_k carry the rate of mode k.
      double best = 1e9, re = 0.0;
      for (const cplx& x : s.eigenvalues) {
        const double d = std::abs(x.imag() + m.energies(k));
        if (d < best) {
          best = d;
          re = x.real();
        }
      }
      CHECK(std::abs(-re - r.pairs(k)) < 0.02 * std::abs(r.pairs(k)));
    }
  }
}

TEST_CASE("uncorrelated comparator converges at weak dissipation") {
  const double j1 = 0.75, j2 = 1.0, jbar = std::hypot(j1, j2);
  auto threshold = [&](double kappa) {
    auto f = [&](double e) { return uncorrelated_variant(three_mode(j1, j2, kappa, e)); };
    return eta_critical_spectral(f, 0.0, 0.999).critical;
  };
  CHECK(std::abs(threshold(0.01 * jbar) - 0.75) < 0.01 * 0.75);
  CHECK(std::abs(threshold(10.0 * jbar) - 0.75) > 0.05 * 0.75);
}

TEST_CASE("exceptional points of the dimer") {
  const double j1 = 0.25, j2 = 0.2, kappa = 1.0;
  const DimerThresholds t = dimer_bs_pa_thresholds(j1, j2, kappa);
  CHECK(t.exceptional_eta == doctest::Approx(1.0 - std::sqrt(2.0) * std::pow(0.0225, 0.25)));
  std::vector<double> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back(0.95 * i / 200.0);

  const auto eps = ep_scan([&](double e) { return build_drift(dimer(j1, j2, kappa, e)).matrix; }, grid);
  REQUIRE(eps.size() >= 1);
  bool matched = false;
  for (const auto& ep : eps) matched |= std::abs(ep.parameter - t.exceptional_eta) < 1e-4;
  CHECK(matched);

  const auto none = ep_scan([&](double e) { return build_drift(dimer(j1, j2, kappa, e, false)).matrix; }, grid);
  CHECK(none.empty());
  CHECK_THROWS_AS(dimer_bs_pa_thresholds(0.2, 0.25, 1.0), Error);
}

TEST_CASE("unbalanced beam splitter has an EP but never goes unstable") {
  CMatrix h = CMatrix::Zero(2, 2);
  auto family = [&](double j) {
    h(0, 1) = h(1, 0) = j;
    return QuadraticSystem(h, {JumpOperator::loss(2, 0, 1.0), JumpOperator::loss(2, 1, 0.2)});
  };
  std::vector<double> grid;
  for (int i = 1; i <= 100; ++i) grid.push_back(0.01 * i);
  const auto eps = ep_scan([&](double j) { return build_drift(family(j)).matrix; }, grid);
  REQUIRE(eps.size() == 1);
  // Coalescence where the coupling equals half the amplitude-rate mismatch.
  CHECK(std::abs(eps[0].parameter - 0.2) < 1e-4);
  for (double j : grid) CHECK(system_spectrum(family(j)).max_real_part < 0.0);
}

TEST_CASE("parametric amplifier thresholds") {
  auto paramp = [](double delta, double ka, double kb, double lambda) {
    CMatrix h = delta * CMatrix::Identity(2, 2), k = CMatrix::Zero(2, 2);
    k(0, 1) = k(1, 0) = lambda;
    std::vector<JumpOperator> jumps;
    if (ka > 0) jumps.push_back(JumpOperator::loss(2, 0, 2 * ka));
    if (kb > 0) jumps.push_back(JumpOperator::loss(2, 1, 2 * kb));
    return QuadraticSystem(h, jumps, k);
  };
  CHECK(paramp_critical_pump(0.5, 1.0, 1.0) == doctest::Approx(std::sqrt(1.25)));
  CHECK(paramp_critical_pump(0.5, 1.0, 0.0) == doctest::Approx(0.0));
  for (auto [delta, ka, kb] : {std::tuple{0.5, 1.0, 0.3}, std::tuple{0.0, 0.7, 0.2}, std::tuple{1.2, 0.4, 0.9}}) {
    const double lc = paramp_critical_pump(delta, ka, kb);
    const auto b = eta_critical_spectral([&](double l) { return paramp(delta, ka, kb, l); }, 0.0, 3.0, 1e-10, "lambda");
    CHECK(std::abs(b.critical - lc) < 1e-7);
  }
}

TEST_CASE("stability grid is ordered by grid index") {
  const auto rows = stability_grid([](double r, double e) { return three_mode(r, 1.0, 1.0, e); }, {0.5, 0.75},
                                   {0.2, 0.6, 0.8}, 2);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].param1 == 0.5);
  CHECK(rows[2].param2 == 0.8);
  CHECK(rows[0].stable);
  CHECK_FALSE(rows[1].stable);
  CHECK(rows[4].stable);
  CHECK_FALSE(rows[5].stable);
}
