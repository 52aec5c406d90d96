#include <doctest.h>

#include <cmath>

#include "dlab/error.hpp"
#include "dlab/quasimode.hpp"

using namespace dlab;

TEST_CASE("harmonic ground state: mu0 = sqrt(c)") {
  for (double c : {1.0, 4.0, 0.25}) {
    const AnharmonicGroundState gs = anharmonic_ground(0, c);
    CHECK(gs.mu0 == doctest::Approx(std::sqrt(c)).epsilon(1e-6));
    CHECK(gs.boundary_mass < 1e-6);
    // Gaussian profile.
    CHECK(gs(0.5) / gs(0.0) == doctest::Approx(std::exp(-0.5 * std::sqrt(c) * 0.25)).epsilon(1e-5));
  }
}

TEST_CASE("quartic ground state") {
  // Known ground energy of -d^2 + z^4.
  CHECK(anharmonic_ground(1, 1.0).mu0 == doctest::Approx(1.0603620904841828).epsilon(1e-5));
}

TEST_CASE("cutoff plateau and support") {
  CHECK(cutoff(0.0) == 1.0);
  CHECK(cutoff(2.5) == 1.0);
  CHECK(cutoff(2.8) == 0.0);
  CHECK(cutoff(-2.8) == 0.0);
  const double mid = cutoff(2.65);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
  for (int n0 : {0, 1, 2}) {
    const auto [lo, hi] = beta_interval(n0);
    CHECK(lo < default_beta(n0));
    CHECK(default_beta(n0) < hi);
  }
}

TEST_CASE("quasimode is normalized and its quotient bounds the eigenvalue") {
  const ProfileFamily fam({ShearProfile::sine()});
  const QuasimodeReport r = quasimode_study(fam, 1.5707963267948966, {16, 32, 64, 128, 256, 512});
  CHECK(r.n0 == 1);
  CHECK(r.c == doctest::Approx(0.25));
  for (const auto& p : r.points) {
    CHECK(p.rayleigh >= p.mu_min * (1 - 1e-10));
    CHECK(p.ratio == doctest::Approx(p.rayleigh / std::pow(p.lambda, 2.0 / 3.0)));
  }
  CHECK(r.top_decade_variation < 0.05);
  CHECK(r.points.back().ratio == doctest::Approx(r.mu0).epsilon(0.05));
}

TEST_CASE("study over every overlap point keeps the smaller quotient") {
  const ProfileFamily fam({ShearProfile::sine()});
  const QuasimodeReport all = quasimode_study(fam, std::nullopt, {32, 64});
  const QuasimodeReport one = quasimode_study(fam, 1.5707963267948966, {32, 64});
  for (std::size_t i = 0; i < all.points.size(); ++i) CHECK(all.points[i].rayleigh <= one.points[i].rayleigh * (1 + 1e-12));
}

TEST_CASE("pinned coefficient and invalid inputs") {
  const ProfileFamily fam({ShearProfile::sine(), ShearProfile::cosine()});
  CHECK_THROWS_AS(anharmonic_ground(-1, 1.0), ConfigError);
  CHECK_THROWS_AS(anharmonic_ground(0, 0.0), ConfigError);
  CHECK_THROWS_AS(quasimode_study(fam, 0.0, {}), ConfigError);
  // At y0 = 0, sin' = 1 and cos has a critical point: V0 ~ y^2.
  CHECK(pinned_coefficient(fam, 0.0, 0) == doctest::Approx(1.0));
}
