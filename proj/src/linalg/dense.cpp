#include <lapacke.h>

#include <algorithm>
#include <limits>

#include "dlab/error.hpp"
#include "dlab/linalg.hpp"

namespace dlab::linalg {
namespace {

void check_info(lapack_int info, const char* op) {
  if (info != 0) throw ConvergenceError("linalg", op, "LAPACK returned info = " + std::to_string(info));
}

}  // namespace

Eigh<double> eigh(Eigen::MatrixXd a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigh<double> r;
  r.values.resize(n);
  if (n == 0) return r;
  check_info(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, r.values.data()), "eigh");
  r.vectors = std::move(a);
  return r;
}

Eigh<std::complex<double>> eigh(Eigen::MatrixXcd a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigh<std::complex<double>> r;
  r.values.resize(n);
  if (n == 0) return r;
  check_info(LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, reinterpret_cast<lapack_complex_double*>(a.data()), n,
                            r.values.data()),
             "eigh");
  r.vectors = std::move(a);
  return r;
}

Eigh<double> eigh_lowest(Eigen::MatrixXd a, int count) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  count = std::clamp(count, 0, static_cast<int>(n));
  Eigh<double> r;
  if (count == 0) return r;
  Eigen::VectorXd w(n);
  Eigen::MatrixXd z(n, count);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  check_info(LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, a.data(), n, 0.0, 0.0, 1, count, 0.0, &found,
                            w.data(), z.data(), n, isuppz.data()),
             "eigh_lowest");
  r.values = w.head(found);
  r.vectors = z.leftCols(found);
  return r;
}

Eigh<std::complex<double>> eigh_lowest(Eigen::MatrixXcd a, int count) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  count = std::clamp(count, 0, static_cast<int>(n));
  Eigh<std::complex<double>> r;
  if (count == 0) return r;
  Eigen::VectorXd w(n);
  Eigen::MatrixXcd z(n, count);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  check_info(LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, reinterpret_cast<lapack_complex_double*>(a.data()),
                            n, 0.0, 0.0, 1, count, 0.0, &found, w.data(),
                            reinterpret_cast<lapack_complex_double*>(z.data()), n, isuppz.data()),
             "eigh_lowest");
  r.values = w.head(found);
  r.vectors = z.leftCols(found);
  return r;
}

Eigh<double> eigh_below(Eigen::MatrixXd a, double upper) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigh<double> r;
  if (n == 0) return r;
  Eigen::VectorXd w(n);
  Eigen::MatrixXd z(n, n);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  check_info(LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'V', 'L', n, a.data(), n, -std::numeric_limits<double>::max(),
                            upper, 0, 0, 0.0, &found, w.data(), z.data(), n, isuppz.data()),
             "eigh_below");
  r.values = w.head(found);
  r.vectors = z.leftCols(found);
  return r;
}

Eigen::VectorXd eigvalsh(Eigen::MatrixXd a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigen::VectorXd w(n);
  if (n == 0) return w;
  check_info(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data()), "eigvalsh");
  return w;
}

RightSvd svd_right(Eigen::MatrixXcd a) {
  const lapack_int m = static_cast<lapack_int>(a.rows()), n = static_cast<lapack_int>(a.cols());
  RightSvd r;
  r.values.resize(std::min(m, n));
  Eigen::MatrixXcd vh(n, n);
  Eigen::VectorXd superb(std::max<lapack_int>(std::min(m, n), 1));
  check_info(LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'N', 'A', m, n, reinterpret_cast<lapack_complex_double*>(a.data()), m,
                            r.values.data(), nullptr, 1, reinterpret_cast<lapack_complex_double*>(vh.data()), n,
                            superb.data()),
             "svd_right");
  r.v = vh.adjoint();
  return r;
}

TridiagGround tridiagonal_lowest(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag) {
  const lapack_int n = static_cast<lapack_int>(diag.size());
  Eigen::VectorXd d = diag, e(std::max<lapack_int>(n, 1));
  e.head(n - 1) = offdiag.head(n - 1);
  Eigen::VectorXd w(n), z(n);
  std::vector<lapack_int> isuppz(2);
  lapack_int found = 0;
  lapack_int tryrac = 1;
  check_info(LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0, 1, 1, &found, w.data(),
                            z.data(), n, 1, isuppz.data(), &tryrac),
             "tridiagonal_lowest");
  return {w[0], z};
}

Eigen::VectorXd principal_angle_sines(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() == 0 || b.cols() == 0) return Eigen::VectorXd();
  // sin of angles from the residual of projecting one basis onto the other.
  const Eigen::MatrixXd ra = a - b * (b.transpose() * a);
  const Eigen::MatrixXd rb = b - a * (a.transpose() * b);
  Eigen::JacobiSVD<Eigen::MatrixXd> sa(ra), sb(rb);
  const Eigen::VectorXd s1 = sa.singularValues(), s2 = sb.singularValues();
  Eigen::VectorXd all(s1.size() + s2.size());
  all << s1, s2;
  std::sort(all.data(), all.data() + all.size(), std::greater<double>());
  return all;
}

}  // namespace dlab::linalg
