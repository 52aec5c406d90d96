#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace dlab::linalg {

template <class Scalar>
struct Eigh {
  Eigen::VectorXd values;  // ascending
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;
};

/// Full symmetric / Hermitian eigendecomposition (LAPACK divide and conquer).
Eigh<double> eigh(Eigen::MatrixXd a);
Eigh<std::complex<double>> eigh(Eigen::MatrixXcd a);

/// The `count` smallest eigenpairs (LAPACK MRRR).
Eigh<double> eigh_lowest(Eigen::MatrixXd a, int count);
Eigh<std::complex<double>> eigh_lowest(Eigen::MatrixXcd a, int count);

/// Eigenpairs with eigenvalue <= upper (LAPACK MRRR, value range).
Eigh<double> eigh_below(Eigen::MatrixXd a, double upper);

/// Eigenvalues only.
Eigen::VectorXd eigvalsh(Eigen::MatrixXd a);

/// Singular values (descending) and the full right factor V of A = U S V^H
/// (LAPACK zgesvd).
struct RightSvd {
  Eigen::VectorXd values;
  Eigen::MatrixXcd v;
};
RightSvd svd_right(Eigen::MatrixXcd a);

/// Smallest eigenvalue of a symmetric tridiagonal matrix with its vector.
struct TridiagGround {
  double value;
  Eigen::VectorXd vector;
};
TridiagGround tridiagonal_lowest(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag);

/// Sines of the principal angles between the column spans of two
/// matrices with orthonormal columns (largest first).
Eigen::VectorXd principal_angle_sines(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// y = A x for a real symmetric operator.
using SymOp = std::function<void(std::span<const double> x, std::span<double> y)>;

struct LanczosOptions {
  int basis_size = 40;
  int keep = 12;
  int max_matvecs = 20000;
  /// Stop when ||A v - theta v|| <= tol.
  double tol = 1e-8;
};

struct LanczosResult {
  double value = 0.0;
  std::vector<double> vector;
  double residual = 0.0;
  int matvecs = 0;
  bool converged = false;
};

/// Smallest eigenpair by thick-restart Lanczos with full
/// reorthogonalization. The start vector need not be normalized.
LanczosResult lanczos_smallest(std::size_t n, const SymOp& op, std::span<const double> start,
                               const LanczosOptions& opts);

}  // namespace dlab::linalg
