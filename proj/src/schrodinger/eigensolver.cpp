#include <cmath>
#include <numbers>
#include <sstream>

#include "dlab/error.hpp"
#include "dlab/fft.hpp"
#include "dlab/fitting.hpp"
#include "dlab/linalg.hpp"
#include "dlab/parallel.hpp"
#include "dlab/schrodinger.hpp"
#include "dlab/simd.hpp"

namespace dlab {
namespace {

// -Delta + lambda^2 V on real grid functions, through real FFTs.
class TorusHamiltonian {
 public:
  TorusHamiltonian(const PotentialGrid& v, double lambda)
      : grid_(v.grid), v_(v.values), coupling_(lambda * lambda), spec_(fft::half_spectrum_size(v.grid)) {
    const int n = grid_.n(), h = n / 2 + 1;
    k2_.resize(spec_.size());
    const double norm = 1.0 / static_cast<double>(grid_.size());
    if (grid_.dim() == 1) {
      for (int j = 0; j < h; ++j) k2_[j] = double(j) * j * norm;
    } else {
      for (int i = 0; i < n; ++i) {
        const double ki = grid_.wavenumber(i);
        for (int j = 0; j < h; ++j) k2_[static_cast<std::size_t>(i) * h + j] = (ki * ki + double(j) * j) * norm;
      }
    }
  }

  void apply(std::span<const double> x, std::span<double> y) {
    const auto& k = simd::active();
    fft::forward_real(grid_, x.data(), spec_.data());
    k.scale_real(spec_.data(), k2_.data(), k2_.size());
    fft::backward_real(grid_, spec_.data(), y.data());
    if (coupling_ != 0.0) k.diag_axpy(coupling_, v_.data(), x.data(), y.data(), x.size());
  }

  /// Approximate e^{-t H} x by Strang steps, in place.
  void imaginary_time(std::vector<double>& x, double t, int steps) {
    const double dt = t / steps;
    const int n = grid_.n();
    std::vector<double> half(k2_.size()), pot(v_.size());
    const double norm = static_cast<double>(grid_.size());
    for (std::size_t i = 0; i < k2_.size(); ++i) half[i] = std::exp(-0.5 * dt * k2_[i] * norm) / norm;
    for (std::size_t i = 0; i < v_.size(); ++i) pot[i] = std::exp(-dt * coupling_ * v_[i]);
    (void)n;
    for (int s = 0; s < steps; ++s) {
      fft::forward_real(grid_, x.data(), spec_.data());
      simd::active().scale_real(spec_.data(), half.data(), half.size());
      fft::backward_real(grid_, spec_.data(), x.data());
      for (std::size_t i = 0; i < x.size(); ++i) x[i] *= pot[i];
      fft::forward_real(grid_, x.data(), spec_.data());
      simd::active().scale_real(spec_.data(), half.data(), half.size());
      fft::backward_real(grid_, spec_.data(), x.data());
      double s2 = 0;
      for (double v : x) s2 += v * v;
      const double inv = 1.0 / std::sqrt(s2);
      for (double& v : x) v *= inv;
    }
  }

 private:
  TorusGrid grid_;
  const std::vector<double>& v_;
  double coupling_;
  std::vector<double> k2_;
  std::vector<cplx> spec_;
};

Field to_field(const TorusGrid& grid, const double* x) {
  Field f(grid);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = x[i];
  return f;
}

// Normalize to unit L2 norm with a nonnegative sum (ground states are
// positive up to sign).
void normalize_eigenvector(Field& f) {
  cplx s = 0;
  for (const auto& v : f.values()) s += v;
  const double sign = s.real() < 0 ? -1.0 : 1.0;
  const double scale = sign / l2_norm(f);
  for (auto& v : f.values()) v *= scale;
}

EigenResult dense_solve(const PotentialGrid& v, double lambda, double tol) {
  const Eigen::MatrixXd h = dense_operator(v, lambda);
  const auto eig = linalg::eigh_lowest(h, 1);
  EigenResult r;
  r.mu = eig.values[0];
  Eigen::VectorXd x = eig.vectors.col(0);
  r.residual = (h * x - r.mu * x).norm() / x.norm();
  r.eigenvector = to_field(v.grid, x.data());
  r.tol = tol;
  r.converged = r.residual <= tol;
  return r;
}

}  // namespace

int grid_rule(double lambda) {
  const double target = 16.0 * std::sqrt(std::max(lambda, 0.0));
  int n = 128;
  while (n < target) n *= 2;
  return n;
}

Eigen::MatrixXd dense_operator(const PotentialGrid& v, double lambda) {
  const TorusGrid& g = v.grid;
  const int n = g.n();
  const double h = g.spacing();
  // Periodic spectral second-derivative matrix, negated.
  Eigen::MatrixXd d2(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        d2(i, j) = std::numbers::pi * std::numbers::pi / (3.0 * h * h) + 1.0 / 6.0;
      } else {
        const int k = i - j;
        const double s = std::sin(k * h / 2.0);
        d2(i, j) = ((k % 2 == 0) ? 1.0 : -1.0) / (2.0 * s * s);
      }
    }
  }
  const double c = lambda * lambda;
  if (g.dim() == 1) {
    Eigen::MatrixXd a = d2;
    for (int i = 0; i < n; ++i) a(i, i) += c * v.values[i];
    return a;
  }
  const Eigen::Index total = static_cast<Eigen::Index>(n) * n;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(total, total);
  // Row-major layout: index = i * n + j, i the first coordinate.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Eigen::Index row = static_cast<Eigen::Index>(i) * n + j;
      for (int k = 0; k < n; ++k) {
        a(row, static_cast<Eigen::Index>(k) * n + j) += d2(i, k);
        a(row, static_cast<Eigen::Index>(i) * n + k) += d2(j, k);
      }
      a(row, row) += c * v.values[row];
    }
  }
  return a;
}

std::vector<double> spectral_refine(const TorusGrid& coarse, const std::vector<double>& values, const TorusGrid& fine) {
  Field f = to_field(coarse, values.data());
  fft::forward(coarse, f.values());
  Field g(fine);
  const int nc = coarse.n(), nf = fine.n();
  auto target = [&](int i) {
    const int k = coarse.wavenumber(i);
    return k >= 0 ? k : k + nf;
  };
  const double scale = 1.0 / static_cast<double>(coarse.size());
  if (coarse.dim() == 1) {
    for (int i = 0; i < nc; ++i) {
      if (i == nc / 2) {
        g[nc / 2] += 0.5 * f[i] * scale;
        g[nf - nc / 2] += 0.5 * f[i] * scale;
      } else {
        g[target(i)] += f[i] * scale;
      }
    }
  } else {
    for (int i = 0; i < nc; ++i) {
      for (int j = 0; j < nc; ++j) {
        const cplx c = f(i, j) * scale;
        const int ti[2] = {target(i), i == nc / 2 ? nf - nc / 2 : -1};
        const int tj[2] = {target(j), j == nc / 2 ? nf - nc / 2 : -1};
        const double wi = i == nc / 2 ? 0.5 : 1.0, wj = j == nc / 2 ? 0.5 : 1.0;
        for (int a = 0; a < 2; ++a) {
          if (ti[a] < 0) continue;
          for (int b = 0; b < 2; ++b) {
            if (tj[b] < 0) continue;
            g(ti[a], tj[b]) += c * wi * wj;
          }
        }
      }
    }
  }
  fft::backward(fine, g.values());
  std::vector<double> out(fine.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = g[i].real();
  return out;
}

EigenResult smallest_eigenvalue(const PotentialGrid& v, double lambda, const EigenOptions& opts) {
  if (!(lambda >= 0.0)) throw ConfigError("schrodinger", "smallest_eigenvalue", "lambda must be >= 0");
  if (!v.nonneg) throw InvariantError("schrodinger", "smallest_eigenvalue", "potential has negative values");
  const TorusGrid& g = v.grid;
  const double n = g.n();
  const double scale = lambda * lambda * v.max_value + n * n;
  const double tol = opts.tol_eig.value_or(1e-6 * scale);

  EigenMethod method = opts.method;
  if (method == EigenMethod::automatic) method = g.size() <= 1024 ? EigenMethod::dense : EigenMethod::krylov;

  EigenResult r;
  if (method == EigenMethod::dense) {
    r = dense_solve(v, lambda, tol);
  } else {
    TorusHamiltonian h(v, lambda);
    std::vector<double> start = opts.start;
    if (start.empty()) {
      start.assign(g.size(), 1.0);
      const double mu_guess = std::pow(lambda, 2.0 / 3.0) * std::cbrt(std::max(v.max_value, 1e-300)) + 1.0;
      h.imaginary_time(start, 3.0 / mu_guess, 30);
    } else if (start.size() != g.size()) {
      throw ConfigError("schrodinger", "smallest_eigenvalue", "start vector has wrong length");
    }
    linalg::LanczosOptions lo;
    lo.tol = tol;
    lo.max_matvecs = opts.max_matvecs;
    const auto lr = linalg::lanczos_smallest(
        g.size(), [&](std::span<const double> x, std::span<double> y) { h.apply(x, y); }, start, lo);
    if (!lr.converged) {
      std::ostringstream os;
      os << "Lanczos did not reach residual " << tol << " after " << lr.matvecs << " products; best residual "
         << lr.residual;
      throw ConvergenceError("schrodinger", "smallest_eigenvalue", os.str());
    }
    r.mu = lr.value;
    r.residual = lr.residual;
    r.matvecs = lr.matvecs;
    r.eigenvector = to_field(g, lr.vector.data());
    r.converged = true;
  }
  r.tol = tol;
  r.n = g.n();
  r.lambda = lambda;
  normalize_eigenvector(r.eigenvector);
  if (r.mu < -1e-8 * scale)
    throw InvariantError("schrodinger", "smallest_eigenvalue", "negative eigenvalue for a nonnegative potential");
  if (g.n() < grid_rule(lambda))
    r.warnings.push_back("grid N = " + std::to_string(g.n()) + " is below the N(lambda) rule value " +
                         std::to_string(grid_rule(lambda)));
  return r;
}

ScalingFit scaling_study(const ProfileFamily& family, const std::vector<double>& lambdas, const ScalingOptions& opts) {
  if (lambdas.size() < 5) throw ConfigError("schrodinger", "scaling_study", "need at least five lambda values");
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (!(lambdas[i] > lambdas[i - 1])) throw ConfigError("schrodinger", "scaling_study", "lambda list must increase");
  if (!(lambdas.front() > 0) || lambdas.back() < 10.0 * lambdas.front())
    throw ConfigError("schrodinger", "scaling_study", "lambda list must span at least one decade");

  ScalingFit fit;
  fit.n0 = overlap_order(family).n0;
  fit.target = 2.0 / (fit.n0 + 2.0);
  fit.points.resize(lambdas.size());

  parallel_for(lambdas.size(), opts.threads, [&](std::size_t idx) {
    const double lambda = lambdas[idx];
    const int n = opts.grid_override.value_or(grid_rule(lambda));
    const TorusGrid grid(n, 2);
    EigenOptions eo;
    eo.tol_eig = opts.tol_eig;
    eo.method = EigenMethod::krylov;
    const EigenResult coarse = smallest_eigenvalue(assemble_potential_2d(family, grid), lambda, eo);
    ScalingPoint& p = fit.points[idx];
    p.lambda = lambda;
    p.mu = coarse.mu;
    p.n = n;
    p.residual = coarse.residual;
    p.matvecs = coarse.matvecs;
    p.converged = true;
    if (opts.richardson) {
      const TorusGrid fine(2 * n, 2);
      std::vector<double> x(coarse.eigenvector.size());
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = coarse.eigenvector[i].real();
      eo.start = spectral_refine(grid, x, fine);
      const EigenResult refined = smallest_eigenvalue(assemble_potential_2d(family, fine), lambda, eo);
      p.mu_refined = refined.mu;
      p.richardson_change = std::abs(refined.mu - coarse.mu) / std::abs(refined.mu);
      p.matvecs += refined.matvecs;
      p.converged = p.richardson_change < opts.richardson_tol;
    }
  });

  std::vector<double> xs, ys;
  for (const auto& p : fit.points) {
    if (p.converged) {
      xs.push_back(p.lambda);
      ys.push_back(p.mu);
    } else {
      fit.excluded.push_back(p.lambda);
    }
  }
  if (xs.size() < 5)
    throw ConvergenceError("schrodinger", "scaling_study",
                           "fewer than five lambda values passed the grid-doubling check");
  const LinearFit lf = loglog_fit(xs, ys);
  fit.slope = lf.slope;
  fit.intercept = lf.intercept;
  fit.r2 = lf.r2;
  return fit;
}

}  // namespace dlab
