#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "dlab/twopoint.hpp"

namespace dlab::testing {

inline Eigen::MatrixXcd random_hermitian(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd h(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) h(i, j) = cplx(nd(rng), nd(rng));
  return 0.5 * (h + h.adjoint());
}

inline Eigen::MatrixXcd random_unitary(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd z(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) z(i, j) = cplx(nd(rng), nd(rng));
  return Eigen::HouseholderQR<Eigen::MatrixXcd>(z).householderQ() * Eigen::MatrixXcd::Identity(m, m);
}

/// Hermitian families with d <= 12 and at most three generators. Odd
/// indices give structured families (repeated blocks, degenerate spectra)
/// with large commutants; even indices give generic ones.
inline std::vector<Eigen::MatrixXcd> random_family(int index, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> ngen(1, 3);
  const int k = ngen(rng);
  std::vector<Eigen::MatrixXcd> l;
  if (index % 2 == 0) {
    std::uniform_int_distribution<int> dd(2, 12);
    const int d = dd(rng);
    for (int i = 0; i < k; ++i) l.push_back(random_hermitian(d, rng));
    return l;
  }
  // B_k (x) I_r (+) C_k (+) diag(e) conjugated by a random unitary.
  std::uniform_int_distribution<int> sdist(1, 3), rdist(1, 3), cdist(0, 3), edist(0, 2);
  int s = sdist(rng), r = rdist(rng), c = cdist(rng), e = edist(rng);
  while (s * r + c + e > 12 || s * r + c + e < 2) {
    s = sdist(rng);
    r = rdist(rng);
    c = cdist(rng);
    e = edist(rng);
  }
  const int d = s * r + c + e;
  const Eigen::MatrixXcd u = random_unitary(d, rng);
  std::uniform_int_distribution<int> level(-1, 1);
  const double shared = level(rng);
  for (int i = 0; i < k; ++i) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
    const Eigen::MatrixXcd b = random_hermitian(s, rng);
    for (int a = 0; a < s; ++a)
      for (int bb = 0; bb < s; ++bb)
        for (int t = 0; t < r; ++t) m(a * r + t, bb * r + t) = b(a, bb);
    if (c > 0) m.block(s * r, s * r, c, c) = random_hermitian(c, rng);
    // Trailing diagonal entries: equal across the block, so degenerate.
    for (int t = 0; t < e; ++t) m(s * r + c + t, s * r + c + t) = shared + i;
    l.push_back(u * m * u.adjoint());
  }
  return l;
}

}  // namespace dlab::testing
