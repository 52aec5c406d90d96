#include <cmath>
#include <numbers>
#include <sstream>

#include "dlab/error.hpp"
#include "dlab/fft.hpp"
#include "dlab/linalg.hpp"
#include "dlab/schrodinger.hpp"
#include "dlab/simd.hpp"

namespace dlab {

double model_problem_exponent(int m, int n) { return 2.0 * n / (2.0 * n + n * m - m); }

ModelProblemResult model_problem_eig(int m, int n, int sign, double lambda, double half_width, int points,
                                     std::optional<double> tol) {
  if (m < 1 || n < 1) throw ConfigError("schrodinger", "model_problem_eig", "exponents must be positive");
  if (sign != 1 && sign != -1) throw ConfigError("schrodinger", "model_problem_eig", "sign must be +1 or -1");
  if (!(half_width > 0) || points < 8)
    throw ConfigError("schrodinger", "model_problem_eig", "need R > 0 and at least 8 interior points");
  if (!(lambda >= 0)) throw ConfigError("schrodinger", "model_problem_eig", "lambda must be >= 0");

  const int mm = points;
  const std::size_t total = static_cast<std::size_t>(mm) * mm;
  const double h = 2.0 * half_width / (mm + 1);
  std::vector<double> xs(mm);
  for (int i = 0; i < mm; ++i) xs[i] = -half_width + (i + 1) * h;

  std::vector<double> pot(total), symbol(total);
  double vmax = 0;
  for (int i = 0; i < mm; ++i) {
    for (int j = 0; j < mm; ++j) {
      const double f = std::pow(xs[i], m) + sign * std::pow(xs[j], n);
      pot[static_cast<std::size_t>(i) * mm + j] = f * f;
      vmax = std::max(vmax, f * f);
    }
  }
  // Type-I sine transform twice in each axis is 2(M+1) times the identity.
  const double norm = 1.0 / (4.0 * (mm + 1.0) * (mm + 1.0));
  const double k0 = std::numbers::pi / (2.0 * half_width);
  for (int p = 0; p < mm; ++p)
    for (int q = 0; q < mm; ++q)
      symbol[static_cast<std::size_t>(p) * mm + q] = k0 * k0 * (double(p + 1) * (p + 1) + double(q + 1) * (q + 1)) * norm;

  const double c = lambda * lambda;
  std::vector<double> work(total);
  auto apply = [&](std::span<const double> x, std::span<double> y) {
    std::copy(x.begin(), x.end(), work.begin());
    fft::sine_transform(mm, 2, work.data());
    for (std::size_t i = 0; i < total; ++i) work[i] *= symbol[i];
    fft::sine_transform(mm, 2, work.data());
    std::copy(work.begin(), work.end(), y.begin());
    simd::active().diag_axpy(c, pot.data(), x.data(), y.data(), total);
  };

  // Start: lowest box mode damped away from the zero set.
  std::vector<double> start(total);
  for (int i = 0; i < mm; ++i)
    for (int j = 0; j < mm; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * mm + j;
      start[k] = std::sin(k0 * (xs[i] + half_width)) * std::sin(k0 * (xs[j] + half_width)) *
                 std::exp(-0.5 * lambda * std::sqrt(pot[k]) * std::sqrt(pot[k]));
    }

  const double scale = c * vmax + 2.0 * k0 * k0 * mm * mm;
  linalg::LanczosOptions lo;
  lo.tol = tol.value_or(1e-9 * scale);
  lo.max_matvecs = 60000;
  const auto lr = linalg::lanczos_smallest(total, apply, start, lo);

  ModelProblemResult r;
  r.m = m;
  r.n = n;
  r.sign = sign;
  r.lambda = lambda;
  r.half_width = half_width;
  r.points = mm;
  r.mu = lr.value;
  r.residual = lr.residual;
  r.converged = lr.converged;
  r.eigenvector = lr.vector;
  if (!lr.converged) {
    std::ostringstream os;
    os << "Lanczos stalled at residual " << lr.residual << " (tolerance " << lo.tol << ")";
    throw ConvergenceError("schrodinger", "model_problem_eig", os.str());
  }
  double outer = 0, all = 0;
  const double edge = 0.99 * half_width;
  for (int i = 0; i < mm; ++i)
    for (int j = 0; j < mm; ++j) {
      const double w = lr.vector[static_cast<std::size_t>(i) * mm + j] * lr.vector[static_cast<std::size_t>(i) * mm + j];
      all += w;
      if (std::abs(xs[i]) > edge || std::abs(xs[j]) > edge) outer += w;
    }
  r.boundary_mass = outer / all;
  if (r.boundary_mass > 0.01) {
    std::ostringstream os;
    os << "box too small: " << 100.0 * r.boundary_mass << "% of the eigenvector mass lies within 1% of the boundary";
    r.warnings.push_back(os.str());
  }
  return r;
}

}  // namespace dlab
