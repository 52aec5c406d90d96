#include <doctest.h>

#include <cmath>

#include "dlab/error.hpp"
#include "dlab/moments.hpp"
#include "dlab/schrodinger.hpp"

using namespace dlab;

namespace {

constexpr double kPi = 3.141592653589793;

Field mixed_phi(int n) {
  // Modes 1 and -3 with weights 0.8 and 0.6.
  return sample(TorusGrid(n, 1), [](double y) {
    return (0.8 * std::exp(cplx(0, y)) + 0.6 * std::exp(cplx(0, -3 * y))) / std::sqrt(2 * kPi);
  });
}

double final_trace(int n, double dt, double t) {
  const ProfileFamily fam({ShearProfile::sine()});
  const MomentParams p{0.05, 0.2, 1};
  const PotentialGrid v = assemble_potential_2d(fam, TorusGrid(n, 2));
  const long steps = std::lround(t / dt);
  return evolve(init_rank_one(default_initial_phi(TorusGrid(n, 1)), p), v, dt, steps).series.back().trace;
}

}  // namespace

TEST_CASE("zero coupling reduces to the heat semigroup on the diagonal") {
  const int n = 32;
  const MomentParams p{0.3, 0.0, 1};
  const PotentialGrid v = assemble_potential_2d(ProfileFamily({ShearProfile::sine()}), TorusGrid(n, 2));
  const EvolveResult r = evolve(init_rank_one(mixed_phi(n), p), v, 0.05, 40);
  REQUIRE(r.series.size() == 41);
  for (const auto& pt : r.series) {
    // |k|^2 = 2 for (1, -1) and 18 for (-3, 3).
    const double expected = 0.64 * std::exp(-p.nu * 2 * pt.t) + 0.36 * std::exp(-p.nu * 18 * pt.t);
    CHECK(pt.trace == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("initial trace is the squared norm") {
  const MomentState s = init_rank_one(default_initial_phi(TorusGrid(64, 1)), {1.0, 1.0, 1});
  CHECK(trace_diag(s) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(hermitian_defect(s.g) < 1e-15);
}

TEST_CASE("evolution keeps g Hermitian and positive semidefinite") {
  const int n = 32;
  const MomentParams p{0.1, 0.4, 2};
  const PotentialGrid v = assemble_potential_2d(ProfileFamily({ShearProfile::sine(), ShearProfile::cosine()}), TorusGrid(n, 2));
  const EvolveResult r = evolve(init_rank_one(mixed_phi(n), p), v, 0.02, 200, {.record_every = 10});
  CHECK(r.hermitian_defect < 1e-12);
  CHECK(kernel_min_eigenvalue(r.state) > -1e-12);
  for (std::size_t i = 1; i < r.series.size(); ++i) CHECK(r.series[i].trace <= r.series[i - 1].trace + 1e-15);
  CHECK(r.series.back().t == doctest::Approx(4.0));
}

TEST_CASE("Strang splitting converges at second order") {
  const double t = 2.0, ref = final_trace(32, 0.0025, t);
  const double e1 = std::abs(final_trace(32, 0.2, t) - ref);
  const double e2 = std::abs(final_trace(32, 0.1, t) - ref);
  const double e3 = std::abs(final_trace(32, 0.05, t) - ref);
  CHECK(std::log2(e1 / e2) > 1.8);
  CHECK(std::log2(e2 / e3) > 1.8);
}

TEST_CASE("terminal decay rate matches nu times the smallest eigenvalue") {
  const int n = 32;
  const ProfileFamily fam({ShearProfile::sine()});
  const MomentParams p{0.1, 0.4, 1};
  const PotentialGrid v = assemble_potential_2d(fam, TorusGrid(n, 2));
  const double lam = effective_lambda(p);
  CHECK(lam == doctest::Approx(2.0));
  CHECK(two_point_coupling(p) == doctest::Approx(p.nu * lam * lam));
  const double mu = smallest_eigenvalue(v, lam).mu;
  const double dt = recommended_dt(p, mu);
  const long steps = std::lround(10.0 / (p.nu * mu * dt));
  const EvolveResult r = evolve(init_rank_one(default_initial_phi(TorusGrid(n, 1)), p), v, dt, steps,
                                {.record_every = 5, .mu_estimate = mu});
  CHECK(r.warnings.empty());
  const DecayFit f = fit_decay(r.series, {}, p.nu * mu);
  REQUIRE(f.rel_gap);
  CHECK(*f.rel_gap < 0.01);
  CHECK(f.r2 > 0.999);
}

TEST_CASE("coarse steps produce a warning") {
  const int n = 16;
  const MomentParams p{1.0, 1.0, 1};
  const PotentialGrid v = assemble_potential_2d(ProfileFamily({ShearProfile::sine()}), TorusGrid(n, 2));
  const EvolveResult r = evolve(init_rank_one(default_initial_phi(TorusGrid(n, 1)), p), v, 1.0, 1, {.mu_estimate = 2.0});
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("fit_decay on a synthetic two-exponential series") {
  std::vector<TracePoint> s;
  for (int i = 0; i <= 400; ++i) {
    const double t = 0.05 * i;
    s.push_back({t, 3.0 * std::exp(-0.7 * t) + std::exp(-5.0 * t)});
  }
  const DecayFit f = fit_decay(s, {}, 0.7);
  CHECK(f.rate == doctest::Approx(0.7).epsilon(1e-4));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-3));
  CHECK(*f.rel_gap < 1e-4);
}

TEST_CASE("invalid moment inputs") {
  const MomentParams p{0.1, 0.1, 1};
  CHECK_THROWS_AS(init_rank_one(Field(TorusGrid(16, 1)), p), ConfigError);
  CHECK_THROWS_AS(TorusGrid(8, 1), ConfigError);
  const MomentState s = init_rank_one(default_initial_phi(TorusGrid(32, 1)), p);
  const PotentialGrid v = assemble_potential_2d(ProfileFamily({ShearProfile::sine()}), TorusGrid(16, 2));
  CHECK_THROWS_AS(evolve(s, v, 0.1, 1), ConfigError);
  CHECK_THROWS_AS(recommended_dt({0.0, 1.0, 1}, 1.0), ConfigError);
  CHECK_THROWS_AS(effective_lambda({0.0, 1.0, 1}), ConfigError);
}
