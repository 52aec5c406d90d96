#include <doctest.h>

#include <cmath>

#include "dlab/error.hpp"
#include "dlab/linalg.hpp"
#include "dlab/mcsim.hpp"
#include "dlab/moments.hpp"
#include "dlab/schrodinger.hpp"

using namespace dlab;

namespace {

SimConfig base_config() {
  SimConfig c;
  c.nu = 0.1;
  c.kappa = 0.3;
  c.ell = 1;
  c.family = ProfileFamily({ShearProfile::sine()});
  c.n = 32;
  c.dt = 0.05;
  c.t_final = 1.0;
  c.n_paths = 64;
  c.seed = 11;
  c.checkpoints = {0, 20};
  return c;
}

// Probabilists' Gauss-Hermite nodes and weights (weight e^{-x^2/2}, total 1).
void gauss_hermite(int m, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(m, m);
  for (int i = 1; i < m; ++i) j(i, i - 1) = j(i - 1, i) = std::sqrt(double(i));
  const auto e = linalg::eigh(j);
  x = e.values;
  w = e.vectors.row(0).transpose().array().square();
}

}  // namespace

TEST_CASE("without diffusion every path keeps its norm") {
  SimConfig c = base_config();
  c.nu = 0.0;
  const EnsembleStats s = run_ensemble(c);
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    CHECK(s.mean_norm2[i] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.stderr_norm2[i] < 1e-10);
  }
}

TEST_CASE("the expected one-step correlation equals one deterministic moment step") {
  SimConfig c = base_config();
  c.family = ProfileFamily({ShearProfile::sine(), ShearProfile::cosine(2, 0.5)});
  c.dt = 0.2;
  c.ell = 2;
  const TorusGrid g1(c.n, 1), g2(c.n, 2);
  const Field phi = default_initial_phi(g1);
  Eigen::VectorXd x, w;
  gauss_hermite(40, x, w);
  Field mean(g2);
  const double s = std::sqrt(c.dt);
  for (int a = 0; a < x.size(); ++a)
    for (int b = 0; b < x.size(); ++b) {
      const double inc[2] = {s * x[a], s * x[b]};
      const Field out = step_path(phi, inc, c);
      for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j) mean(i, j) += w[a] * w[b] * out[i] * std::conj(out[j]);
    }
  const MomentParams p{c.nu, c.kappa, c.ell};
  const EvolveResult r = evolve(init_rank_one(phi, p), assemble_potential_2d(c.family, g2), c.dt, 1);
  double err = 0, scale = 0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    err = std::max(err, std::abs(mean[i] - r.state.g[i]));
    scale = std::max(scale, std::abs(r.state.g[i]));
  }
  CHECK(err < 1e-12 * scale);
}

TEST_CASE("ensembles are reproducible and independent of the thread count") {
  SimConfig c = base_config();
  const EnsembleStats a = run_ensemble(c);
  c.threads = 3;
  const EnsembleStats b = run_ensemble(c);
  CHECK(a.mean_norm2 == b.mean_norm2);
  CHECK(a.stderr_norm2 == b.stderr_norm2);
  REQUIRE(a.checkpoints.size() == 2);
  for (std::size_t i = 0; i < a.checkpoints[1].mean.size(); ++i)
    CHECK(a.checkpoints[1].mean[i] == b.checkpoints[1].mean[i]);
  c.seed = 12;
  CHECK(run_ensemble(c).mean_norm2 != a.mean_norm2);
  CHECK(a.effective_samples == 32);
}

TEST_CASE("ensemble mean agrees with the moment trace within the standard error") {
  SimConfig c = base_config();
  c.n_paths = 400;
  const EnsembleStats s = run_ensemble(c);
  const MomentParams p{c.nu, c.kappa, c.ell};
  const TorusGrid g2(c.n, 2);
  const EvolveResult r = evolve(init_rank_one(default_initial_phi(TorusGrid(c.n, 1)), p),
                                assemble_potential_2d(c.family, g2), c.dt, c.steps());
  REQUIRE(r.series.size() == s.t.size());
  for (std::size_t i = 1; i < s.t.size(); ++i) {
    const double z = std::abs(s.mean_norm2[i] - r.series[i].trace) / s.stderr_norm2[i];
    CHECK(z < 4.5);
  }
}

TEST_CASE("invalid ensemble configurations") {
  SimConfig c = base_config();
  c.n_paths = 3;
  CHECK_THROWS_AS(run_ensemble(c), ConfigError);
  c = base_config();
  c.t_final = 1.01;
  CHECK_THROWS_AS(run_ensemble(c), ConfigError);
  c = base_config();
  c.checkpoints = {100};
  CHECK_THROWS_AS(run_ensemble(c), ConfigError);
  c = base_config();
  const double one[2] = {0.1, 0.2};
  CHECK_THROWS_AS(step_path(default_initial_phi(TorusGrid(c.n, 1)), one, c), ConfigError);
}

TEST_CASE("pinned lower bound holds for the sine shear at y0 = pi / 2") {
  SimConfig c = base_config();
  c.nu = 0.01;
  c.kappa = 1.0;
  c.n = 128;
  c.dt = 0.25;
  c.t_final = 10.0;
  c.n_paths = 128;
  c.checkpoints.clear();
  const LowerBoundReport r = lower_bound_experiment(c.family, 1.5707963267948966, c);
  CHECK(r.n0 == 1);
  CHECK(r.bound_holds);
  CHECK(r.max_z < 4.5);
}
