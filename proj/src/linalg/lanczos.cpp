#include <cmath>

#include "dlab/error.hpp"
#include "dlab/linalg.hpp"

namespace dlab::linalg {

LanczosResult lanczos_smallest(std::size_t n, const SymOp& op, std::span<const double> start,
                               const LanczosOptions& opts) {
  using Eigen::Index;
  const int m = std::max(opts.basis_size, 4);
  const int keep = std::clamp(opts.keep, 1, m - 2);
  if (start.size() != n) throw ConfigError("linalg", "lanczos_smallest", "start vector has wrong length");

  Eigen::MatrixXd basis(static_cast<Index>(n), m + 1);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd w(static_cast<Index>(n));

  Eigen::Map<const Eigen::VectorXd> s0(start.data(), static_cast<Index>(n));
  const double s0n = s0.norm();
  if (!(s0n > 0.0)) throw ConfigError("linalg", "lanczos_smallest", "start vector is zero");
  basis.col(0) = s0 / s0n;

  LanczosResult res;
  int active = 0;  // index of the vector to expand next
  double best_residual = INFINITY;

  while (true) {
    double beta = 0.0;
    for (int p = active; p < m; ++p) {
      op(std::span<const double>(basis.col(p).data(), n), std::span<double>(w.data(), n));
      ++res.matvecs;
      // Classical Gram-Schmidt, applied twice.
      Eigen::VectorXd coeff = basis.leftCols(p + 1).transpose() * w;
      w.noalias() -= basis.leftCols(p + 1) * coeff;
      const Eigen::VectorXd c2 = basis.leftCols(p + 1).transpose() * w;
      w.noalias() -= basis.leftCols(p + 1) * c2;
      coeff += c2;
      for (int i = 0; i <= p; ++i) h(i, p) = h(p, i) = coeff[i];
      beta = w.norm();
      if (p + 1 < m) {
        if (beta == 0.0) {
          // Invariant subspace: fill with a fresh orthogonal direction.
          w.setOnes();
          w -= basis.leftCols(p + 1) * (basis.leftCols(p + 1).transpose() * w);
          basis.col(p + 1) = w.normalized();
          h(p + 1, p) = h(p, p + 1) = 0.0;
        } else {
          basis.col(p + 1) = w / beta;
          h(p + 1, p) = h(p, p + 1) = beta;
        }
      }
    }

    const Eigh<double> ritz = eigh(h);
    const double estimate = beta * std::abs(ritz.vectors(m - 1, 0));
    best_residual = std::min(best_residual, estimate);
    if (estimate <= opts.tol || res.matvecs >= opts.max_matvecs) {
      Eigen::VectorXd y = basis.leftCols(m) * ritz.vectors.col(0);
      y.normalize();
      op(std::span<const double>(y.data(), n), std::span<double>(w.data(), n));
      ++res.matvecs;
      const double theta = y.dot(w);
      const double r = (w - theta * y).norm();
      res.value = theta;
      res.residual = r;
      res.vector.assign(y.data(), y.data() + n);
      res.converged = r <= opts.tol * 1.0000001;
      if (res.converged || res.matvecs >= opts.max_matvecs) return res;
      // Explicit residual disagrees with the estimate: restart from y.
      basis.col(0) = y;
      h.setZero();
      active = 0;
      continue;
    }

    // Thick restart: keep the lowest Ritz vectors and the residual direction.
    const Eigen::MatrixXd kept = basis.leftCols(m) * ritz.vectors.leftCols(keep);
    const Eigen::VectorXd resid_dir = w / beta;
    basis.leftCols(keep) = kept;
    basis.col(keep) = resid_dir;
    h.setZero();
    for (int i = 0; i < keep; ++i) {
      h(i, i) = ritz.values[i];
      h(i, keep) = h(keep, i) = beta * ritz.vectors(m - 1, i);
    }
    active = keep;
  }
}

}  // namespace dlab::linalg
