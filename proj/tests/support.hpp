#ifndef DISSIPAIR_TESTS_SUPPORT_HPP
#define DISSIPAIR_TESTS_SUPPORT_HPP

#include <random>

#include "dissipair/gaussian_core.hpp"

namespace dissipair::testing {

// Random chain with nearest-neighbour hoppings only (hence chiral) and a
// canonical dissipator on two even sites.
inline QuadraticSystem random_chiral_chain(std::mt19937_64& rng, Eigen::Index n, bool complex_hopping = false) {
  std::uniform_real_distribution<double> mag(0.3, 1.5), ph(-3.14159, 3.14159);
  CMatrix h = CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const cplx t = complex_hopping ? std::polar(mag(rng), ph(rng)) : cplx(mag(rng));
    h(i, i + 1) = t;
    h(i + 1, i) = std::conj(t);
  }
  return QuadraticSystem(h);
}

inline CMatrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

}  // namespace dissipair::testing

#endif
