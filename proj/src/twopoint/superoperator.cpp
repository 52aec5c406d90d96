#include <Eigen/SVD>
#include <cmath>

#include "dlab/error.hpp"
#include "dlab/linalg.hpp"
#include "dlab/twopoint.hpp"

namespace dlab {

Eigen::MatrixXcd apply_superoperator(const GeneratorFamily& family, const Eigen::MatrixXcd& m) {
  if (m.rows() != family.dim() || m.cols() != family.dim())
    throw ConfigError("twopoint", "apply_superoperator", "matrix size differs from the family dimension");
  // With L = -iA, -1/2 [L,[L,M]] = 1/2 [A,[A,M]].
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m.rows(), m.cols());
  for (std::size_t k = 0; k < family.size(); ++k) {
    const Eigen::MatrixXcd a = family.dense(k);
    const Eigen::MatrixXcd c = a * m - m * a;
    out += 0.5 * (a * c - c * a);
  }
  return out;
}

Eigen::MatrixXd build_superoperator(const GeneratorFamily& family) {
  const int d = family.dim();
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  Eigen::MatrixXd s(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    s.col(j) = hermitian_coordinates(apply_superoperator(family, hermitian_from_coordinates(d, e.data())));
    e[j] = 0.0;
  }
  return 0.5 * (s + s.transpose());
}

Eigen::MatrixXd commutant_oracle(const GeneratorFamily& family, double tol) {
  const int d = family.dim();
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  // vec(AM - MA) = (I (x) A - A^T (x) I) vec(M), column-major vec.
  Eigen::MatrixXcd sys = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(family.size()) * n, n);
  for (std::size_t k = 0; k < family.size(); ++k) {
    const Eigen::MatrixXcd a = family.dense(k);
    const Eigen::Index r0 = static_cast<Eigen::Index>(k) * n;
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) {
        // Column (i, j) of the system: unit matrix E_ij.
        const Eigen::Index col = static_cast<Eigen::Index>(j) * d + i;
        for (int r = 0; r < d; ++r) {
          sys(r0 + static_cast<Eigen::Index>(j) * d + r, col) += a(r, i);
          sys(r0 + static_cast<Eigen::Index>(r) * d + i, col) -= a(j, r);
        }
      }
  }
  const linalg::RightSvd svd = linalg::svd_right(std::move(sys));
  const Eigen::VectorXd& sv = svd.values;
  const double smax = sv.size() ? sv[0] : 0.0;
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv[rank] > tol * smax) ++rank;
  const Eigen::MatrixXcd null = svd.v.rightCols(n - rank);

  // Hermitian and anti-Hermitian parts of each null matrix span the
  // Hermitian solutions, since the solution set is closed under adjoints.
  Eigen::MatrixXd herm(n, 2 * null.cols());
  for (Eigen::Index c = 0; c < null.cols(); ++c) {
    const Eigen::MatrixXcd m = Eigen::Map<const Eigen::MatrixXcd>(null.col(c).data(), d, d);
    herm.col(2 * c) = hermitian_coordinates(0.5 * (m + m.adjoint()));
    herm.col(2 * c + 1) = hermitian_coordinates(cplx(0, -0.5) * (m - m.adjoint()));
  }
  if (herm.cols() == 0) return Eigen::MatrixXd(n, 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> hs(herm, Eigen::ComputeThinU);
  const Eigen::VectorXd hv = hs.singularValues();
  Eigen::Index r = 0;
  while (r < hv.size() && hv[r] > 1e-8 * hv[0]) ++r;
  if (r != null.cols())
    throw InvariantError("twopoint", "commutant_oracle", "Hermitian parts do not span a space of the complex dimension");
  return hs.matrixU().leftCols(r);
}

}  // namespace dlab
