#include <doctest.h>

#include <cmath>
#include <random>

#include "dlab/profiles.hpp"

using namespace dlab;

TEST_CASE("closed-form derivatives agree with pointwise derivatives and finite differences") {
  const ShearProfile u({0.3, 1.0, -0.5}, {0.7, 0.2});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> y(0, 2 * M_PI);
  for (int t = 0; t < 20; ++t) {
    const double p = y(rng);
    for (int k = 0; k <= 4; ++k) CHECK(u.derivative(k)(p) == doctest::Approx(u.derivative_at(k, p)).epsilon(1e-12));
    const double h = 1e-5;
    CHECK(u.derivative_at(1, p) == doctest::Approx((u(p + h) - u(p - h)) / (2 * h)).epsilon(1e-8));
  }
}

TEST_CASE("critical points of sin y are simple") {
  const auto cps = critical_points(ShearProfile::sine());
  REQUIRE(cps.size() == 2);
  CHECK(cps[0].y == doctest::Approx(M_PI / 2));
  CHECK(cps[1].y == doctest::Approx(3 * M_PI / 2));
  for (const auto& c : cps) CHECK(c.order == 1);
  CHECK(cps[0].leading_coeff == doctest::Approx(-0.5));
}

TEST_CASE("overlap order n0") {
  CHECK(overlap_order(ProfileFamily({ShearProfile::sine()})).n0 == 1);
  CHECK(overlap_order(ProfileFamily({ShearProfile::sine(), ShearProfile::cosine()})).n0 == 0);
  CHECK(overlap_order(ProfileFamily({sin_cubed()})).n0 == 2);
  // sin 2y has simple critical points; sin^3 has a degenerate one at 0.
  CHECK(overlap_order(ProfileFamily({ShearProfile::sine(2)})).n0 == 1);
}

TEST_CASE("sin^3 as a trigonometric polynomial") {
  const ShearProfile s = sin_cubed();
  for (double y : {0.1, 1.0, 2.5, 4.0}) CHECK(s(y) == doctest::Approx(std::pow(std::sin(y), 3)));
  // sin^3 - 1 ~ -3/2 z^2 at pi/2 and sin^3 ~ y^3 at 0.
  CHECK(local_order(s, M_PI / 2) == 1);
  CHECK(local_order(s, 0.0) == 2);
}

TEST_CASE("constant profiles are degenerate") {
  const ProfileFamily f({ShearProfile::constant(2.0), ShearProfile::sine()});
  const auto r = overlap_order(f);
  CHECK(r.n0 == 1);
  REQUIRE(r.degenerate.size() == 1);
  CHECK(r.degenerate[0] == 0);
  CHECK(local_order(ShearProfile::constant(1.0), 0.3) == kInfiniteOrder);
}

TEST_CASE("recentering subtracts the value at y0") {
  const ProfileFamily f({ShearProfile::sine(), ShearProfile::cosine()});
  const auto r = f.recentered(0.4);
  for (std::size_t j = 0; j < f.size(); ++j) CHECK(std::abs(r[j](0.4)) < 1e-14);
}
