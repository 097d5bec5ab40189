#ifndef PFR_TEST_SUPPORT_HPP
#define PFR_TEST_SUPPORT_HPP

#include "pfr/core.hpp"
#include "pfr/rng.hpp"

namespace pfr::testing {

inline DenseMatrix gaussian_matrix(Index m, Index n, std::uint64_t seed) {
  RandomStream rng(seed, 99);
  DenseMatrix a(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) a(i, j) = rng.normal();
  return a;
}

inline Vector gaussian_vector(Index n, std::uint64_t seed) {
  RandomStream rng(seed, 98);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

inline double max_abs(const DenseMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace pfr::testing

#endif
