#include "dlab/quasimode.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dlab/error.hpp"
#include "dlab/linalg.hpp"
#include "dlab/schrodinger.hpp"

namespace dlab {
namespace {

double smooth_step(double t) {
  // 0 for t <= 0, 1 for t >= 1, C-infinity in between.
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

AnharmonicGroundState solve_box(int n0, double c, double half_width, int points) {
  AnharmonicGroundState gs;
  gs.n0 = n0;
  gs.c = c;
  gs.half_width = half_width;
  gs.points = points;
  const double h = 2.0 * half_width / (points + 1);
  Eigen::VectorXd diag(points), off(points);
  gs.z.resize(points);
  for (int i = 0; i < points; ++i) {
    const double z = -half_width + (i + 1) * h;
    gs.z[i] = z;
    diag[i] = 2.0 / (h * h) + c * std::pow(z, 2 * n0 + 2);
    off[i] = -1.0 / (h * h);
  }
  const auto ground = linalg::tridiagonal_lowest(diag, off);
  gs.mu0 = ground.value;
  gs.p.assign(ground.vector.data(), ground.vector.data() + points);
  double sum = 0, norm2 = 0, outer = 0;
  for (int i = 0; i < points; ++i) {
    sum += gs.p[i];
    norm2 += gs.p[i] * gs.p[i];
    if (std::abs(gs.z[i]) > 0.9 * half_width) outer += gs.p[i] * gs.p[i];
  }
  const double scale = (sum < 0 ? -1.0 : 1.0) / std::sqrt(norm2 * h);
  for (double& v : gs.p) v *= scale;
  gs.boundary_mass = outer / norm2;
  return gs;
}

}  // namespace

double AnharmonicGroundState::operator()(double zz) const {
  const double h = 2.0 * half_width / (points + 1);
  // Node i sits at -R + (i+1) h; the Dirichlet ends are virtual zero nodes.
  const double s = (zz + half_width) / h - 1.0;
  if (s <= -1.0 || s >= points) return 0.0;
  const int i = static_cast<int>(std::floor(s));
  const double t = s - i;
  auto at = [&](int k) { return (k < 0 || k >= points) ? 0.0 : p[k]; };
  const double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
  // Catmull-Rom.
  return p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)));
}

AnharmonicGroundState anharmonic_ground(int n0, double c, std::optional<double> half_width, int points) {
  if (n0 < 0) throw ConfigError("quasimode", "anharmonic_ground", "n0 must be >= 0");
  if (!(c > 0)) throw ConfigError("quasimode", "anharmonic_ground", "coefficient c must be positive");
  if (points < 512) throw ConfigError("quasimode", "anharmonic_ground", "need at least 512 grid points");
  double r = half_width.value_or(6.0 * std::pow(c, -1.0 / (2.0 * n0 + 4.0)));
  for (int attempt = 0; attempt <= 3; ++attempt, r *= 2.0) {
    AnharmonicGroundState gs = solve_box(n0, c, r, points);
    if (gs.boundary_mass < 1e-6) return gs;
  }
  throw ConvergenceError("quasimode", "anharmonic_ground",
                         "ground state mass near the box edge stays above 1e-6 after three doublings");
}

std::pair<double, double> beta_interval(int n0) {
  const double lo = (2.0 * n0 + 2.0) / ((n0 + 2.0) * (2.0 * n0 + 3.0));
  const double hi = 1.0 / (n0 + 2.0);
  return {lo, hi};
}

double default_beta(int n0) {
  const auto [lo, hi] = beta_interval(n0);
  return 0.5 * (lo + hi);
}

double cutoff(double s, double plateau, double support) {
  const double a = std::abs(s);
  if (a <= plateau) return 1.0;
  if (a >= support) return 0.0;
  return 1.0 - smooth_step((a - plateau) / (support - plateau));
}

Field build_quasimode(const AnharmonicGroundState& gs, double lambda, double beta, double y0, const TorusGrid& grid,
                      const QuasimodeOptions& opts) {
  const auto [lo, hi] = beta_interval(gs.n0);
  if (!(beta > lo && beta < hi)) {
    std::ostringstream os;
    os << "beta = " << beta << " lies outside the admissible interval (" << lo << ", " << hi << ")";
    throw ConfigError("quasimode", "build_quasimode", os.str());
  }
  if (!(lambda >= 1.0)) throw ConfigError("quasimode", "build_quasimode", "lambda must be >= 1");
  if (grid.dim() != 1) throw ConfigError("quasimode", "build_quasimode", "grid must be one-dimensional");
  const double pi = std::numbers::pi;
  const double lb = std::pow(lambda, beta);
  const double ls = std::pow(lambda, 1.0 / (gs.n0 + 2.0));
  Field q(grid);
  for (int i = 0; i < grid.n(); ++i) {
    // Periodic offset in (-pi, pi].
    double d = std::remainder(grid.coordinate(i) - y0, 2.0 * pi);
    q[i] = cutoff(lb * d, opts.plateau, opts.support) * gs(ls * d);
  }
  const double norm = l2_norm(q);
  if (!(norm > 0)) throw InvariantError("quasimode", "build_quasimode", "quasimode vanishes on the grid");
  for (auto& v : q.values()) v /= norm;
  return q;
}

double rayleigh(const Field& q, const ProfileFamily& family, double y0, double lambda) {
  const PotentialGrid v = assemble_potential_1d(family, q.grid(), y0);
  const double h1 = h1_seminorm(q);
  double pot = 0;
  for (std::size_t i = 0; i < q.size(); ++i) pot += v.values[i] * std::norm(q[i]);
  return h1 * h1 + lambda * lambda * pot * q.grid().cell_volume();
}

double pinned_coefficient(const ProfileFamily& family, double y0, int n0) {
  double c = 0;
  for (const auto& u : family.profiles()) {
    if (u.is_constant()) continue;
    const int order = local_order(u, y0);
    if (order < n0) {
      throw ConfigError("quasimode", "pinned_coefficient",
                        "a profile has critical order below n0 at y0 = " + std::to_string(y0));
    }
    if (order == n0) {
      const double cj = u.derivative_at(n0 + 1, y0) / factorial(n0 + 1);
      c += cj * cj;
    }
  }
  return c;
}

QuasimodeReport quasimode_study(const ProfileFamily& family, std::optional<double> y0,
                                const std::vector<double>& lambdas, const QuasimodeStudyOptions& opts) {
  if (lambdas.empty()) throw ConfigError("quasimode", "quasimode_study", "lambda list is empty");
  const OverlapResult ov = overlap_order(family);
  std::vector<double> sites;
  if (y0) {
    sites.push_back(*y0);
  } else {
    sites = ov.maximizers;
  }
  if (sites.empty()) throw ConfigError("quasimode", "quasimode_study", "no overlapping critical point to pin at");

  QuasimodeReport rep;
  bool first = true;
  const TorusGrid grid(opts.grid_points, 1);
  for (double site : sites) {
    int n0 = kInfiniteOrder;
    for (const auto& u : family.profiles())
      if (!u.is_constant()) n0 = std::min(n0, local_order(u, site));
    if (n0 == 0) throw ConfigError("quasimode", "quasimode_study", "y0 is not a critical point of every profile");
    const double c = pinned_coefficient(family, site, n0);
    const double beta = opts.beta.value_or(default_beta(n0));
    const AnharmonicGroundState gs = anharmonic_ground(n0, c);
    const PotentialGrid v = assemble_potential_1d(family, grid, site);
    std::vector<QuasimodePoint> pts;
    for (double lambda : lambdas) {
      QuasimodePoint p;
      p.lambda = lambda;
      p.y0 = site;
      const Field q = build_quasimode(gs, lambda, beta, site, grid, opts.cutoff);
      p.rayleigh = rayleigh(q, family, site, lambda);
      p.ratio = p.rayleigh / std::pow(lambda, 2.0 / (n0 + 2.0));
      if (opts.with_eigenvalue) {
        EigenOptions eo;
        eo.method = EigenMethod::krylov;
        eo.tol_eig = 1e-10 * (lambda * lambda * v.max_value + double(grid.n()) * grid.n());
        eo.start.resize(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) eo.start[i] = q[i].real() + 1e-3;
        p.mu_min = smallest_eigenvalue(v, lambda, eo).mu;
      }
      pts.push_back(p);
    }
    if (first) {
      rep.n0 = n0;
      rep.beta = beta;
      rep.interval = beta_interval(n0);
      rep.c = c;
      rep.mu0 = gs.mu0;
      rep.points = pts;
      first = false;
    } else {
      for (std::size_t i = 0; i < pts.size(); ++i)
        if (pts[i].rayleigh < rep.points[i].rayleigh) rep.points[i] = pts[i];
    }
  }
  const double top = *std::max_element(lambdas.begin(), lambdas.end());
  double lo = INFINITY, hi = 0;
  for (const auto& p : rep.points) {
    if (p.lambda >= top / 10.0 * (1 - 1e-12)) {
      lo = std::min(lo, p.ratio);
      hi = std::max(hi, p.ratio);
    }
  }
  rep.top_decade_variation = (hi - lo) / lo;
  return rep;
}

}  // namespace dlab
