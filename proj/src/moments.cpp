#include "dlab/moments.hpp"

#include <cmath>
#include <sstream>

#include "dlab/error.hpp"
#include "dlab/fft.hpp"
#include "dlab/fitting.hpp"
#include "dlab/linalg.hpp"
#include "dlab/simd.hpp"

namespace dlab {

double two_point_coupling(const MomentParams& p) { return p.kappa * double(p.ell) * double(p.ell); }

double effective_lambda(const MomentParams& p) {
  if (!(p.nu > 0)) throw ConfigError("moments", "effective_lambda", "nu must be positive");
  return std::abs(p.ell) * std::sqrt(p.kappa / p.nu);
}

MomentState init_rank_one(const Field& phi, const MomentParams& params) {
  if (phi.grid().dim() != 1) throw ConfigError("moments", "init_rank_one", "phi must live on a 1D grid");
  if (!(l2_norm(phi) > 0)) throw ConfigError("moments", "init_rank_one", "phi is zero");
  if (!(params.nu >= 0) || !(params.kappa >= 0))
    throw ConfigError("moments", "init_rank_one", "nu and kappa must be nonnegative");
  const int n = phi.grid().n();
  MomentState s{Field(TorusGrid(n, 2)), 0.0, params};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s.g(i, j) = phi[i] * std::conj(phi[j]);
  return s;
}

double trace_diag(const MomentState& state) {
  const int n = state.g.grid().n();
  double tr = 0, gmax = 0;
  for (int i = 0; i < n; ++i) tr += state.g(i, i).real();
  for (const auto& v : state.g.values()) gmax = std::max(gmax, std::abs(v));
  tr *= state.g.grid().spacing();
  if (tr < -1e-10 * gmax * state.g.grid().spacing() * n)
    throw InvariantError("moments", "trace_diag", "negative trace " + std::to_string(tr));
  return tr;
}

double hermitian_defect(const Field& g) {
  const int n = g.grid().n();
  double d = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) d = std::max(d, std::abs(g(i, j) - std::conj(g(j, i))));
  return d;
}

double recommended_dt(const MomentParams& p, double mu_estimate, double factor) {
  if (!(p.nu > 0) || !(mu_estimate > 0))
    throw ConfigError("moments", "recommended_dt", "need nu > 0 and a positive eigenvalue estimate");
  return factor / (p.nu * mu_estimate);
}

EvolveResult evolve(MomentState state, const PotentialGrid& v, double dt, long steps, const EvolveOptions& opts) {
  const TorusGrid& grid = state.g.grid();
  if (!(v.grid == grid)) throw ConfigError("moments", "evolve", "potential grid differs from the state grid");
  if (!(dt > 0) || steps < 0) throw ConfigError("moments", "evolve", "need dt > 0 and steps >= 0");
  const int n = grid.n();
  const std::size_t total = grid.size();
  const double nu = state.params.nu;
  const double coupling = two_point_coupling(state.params);

  EvolveResult res;
  if (opts.mu_estimate) {
    const double x = dt * nu * *opts.mu_estimate;
    if (x > 0.1) {
      std::ostringstream os;
      os << "dt * nu * mu = " << x << " exceeds 0.1; relative rate error of order " << x * x / 12.0;
      res.warnings.push_back(os.str());
    }
  }

  const std::vector<double> k2 = laplacian_symbol(grid);
  const double inv = 1.0 / static_cast<double>(total);
  std::vector<double> half(total), full(total), half_trace(n), pot(total);
  for (std::size_t i = 0; i < total; ++i) {
    half[i] = std::exp(-0.5 * nu * k2[i] * dt) * inv;
    full[i] = std::exp(-nu * k2[i] * dt) * inv;
    pot[i] = std::exp(-coupling * v.values[i] * dt);
  }
  // half[k, -k] unnormalized, used to read off the trace from the spectrum.
  for (int k = 0; k < n; ++k) half_trace[k] = half[static_cast<std::size_t>(k) * n + (n - k) % n] * total;

  const double h = grid.spacing();
  const int every = std::max(1, opts.record_every);
  auto& kern = simd::active();
  auto& g = state.g;
  double gscale = 0;
  for (const auto& x : g.values()) gscale = std::max(gscale, std::abs(x));

  res.series.push_back({state.t, trace_diag(state)});
  if (steps == 0) {
    res.state = std::move(state);
    return res;
  }

  fft::forward(grid, g.values());
  kern.scale_real(g.values().data(), half.data(), total);
  const double t0 = state.t;
  for (long s = 1; s <= steps; ++s) {
    fft::backward(grid, g.values());
    const bool record = s % every == 0 || s == steps;
    if (record && gscale > 0) res.hermitian_defect = std::max(res.hermitian_defect, hermitian_defect(g) / gscale);
    kern.scale_real(g.values().data(), pot.data(), total);
    fft::forward(grid, g.values());
    if (record) {
      double tr = 0;
      for (int k = 0; k < n; ++k) tr += g(k, (n - k) % n).real() * half_trace[k];
      res.series.push_back({t0 + s * dt, tr * h / n});
    }
    kern.scale_real(g.values().data(), s == steps ? half.data() : full.data(), total);
  }
  fft::backward(grid, g.values());
  state.t = t0 + steps * dt;

  // Project onto Hermitian kernels; the exact flow preserves this set.
  for (int i = 0; i < n; ++i) {
    g(i, i) = g(i, i).real();
    for (int j = i + 1; j < n; ++j) {
      const cplx a = 0.5 * (g(i, j) + std::conj(g(j, i)));
      g(i, j) = a;
      g(j, i) = std::conj(a);
    }
  }
  trace_diag(state);
  for (const auto& p : res.series)
    if (!std::isfinite(p.trace)) throw InvariantError("moments", "evolve", "trace became non-finite");
  res.state = std::move(state);
  return res;
}

double kernel_min_eigenvalue(const MomentState& state) {
  const int n = state.g.grid().n();
  Eigen::MatrixXcd m(n, n);
  const double h = state.g.grid().spacing();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = state.g(i, j) * h;
  m = 0.5 * (m + m.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

DecayFit fit_decay(const std::vector<TracePoint>& series, const WindowPolicy& policy,
                   std::optional<double> reference_rate) {
  const std::size_t n = series.size();
  if (n < 4) throw ConfigError("moments", "fit_decay", "series needs at least four points");
  std::vector<double> t(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(series[i].trace > 0))
      throw ConvergenceError("moments", "fit_decay", "trace reached zero or below; shorten T");
    t[i] = series[i].t;
    y[i] = std::log(series[i].trace);
  }
  std::size_t start = static_cast<std::size_t>(std::floor(n * (1.0 - policy.terminal_fraction)));
  start = std::min(start, n - 3);
  auto fit_from = [&](std::size_t a) {
    return linear_fit(std::span<const double>(t).subspan(a), std::span<const double>(y).subspan(a));
  };
  LinearFit lf = fit_from(start);
  while (start > 0) {
    const double r = y[start - 1] - (lf.slope * t[start - 1] + lf.intercept);
    if (std::abs(r) >= policy.linearity_tol) break;
    --start;
    lf = fit_from(start);
  }
  DecayFit f;
  f.rate = -lf.slope;
  f.intercept = lf.intercept;
  f.t_a = t[start];
  f.t_b = t[n - 1];
  f.r2 = lf.r2;
  f.window_points = n - start;
  const double efolds = y[start] - y[n - 1];
  if (efolds < policy.min_efolds) {
    std::ostringstream os;
    os << "fit window spans only " << efolds << " e-foldings (need " << policy.min_efolds << "); increase T";
    throw ConvergenceError("moments", "fit_decay", os.str());
  }
  if (f.r2 < policy.min_r2) {
    std::ostringstream os;
    os << "log-trace is not linear on the terminal window (R^2 = " << f.r2 << ")";
    throw ConvergenceError("moments", "fit_decay", os.str());
  }
  if (reference_rate) {
    f.nu_mu = *reference_rate;
    f.rel_gap = std::abs(f.rate - *reference_rate) / std::abs(*reference_rate);
  }
  return f;
}

Field default_initial_phi(const TorusGrid& grid1d) {
  Field f = sample(grid1d, [](double y) { return std::polar(1.0, y); });
  const double nrm = l2_norm(f);
  for (auto& v : f.values()) v /= nrm;
  return f;
}

}  // namespace dlab
