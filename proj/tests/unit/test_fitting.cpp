#include <doctest.h>

#include <cmath>
#include <vector>

#include "dlab/error.hpp"
#include "dlab/fitting.hpp"

using namespace dlab;

TEST_CASE("exact line") {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const LinearFit f = linear_fit(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK(f.max_residual < 1e-12);
}

TEST_CASE("power law in log-log coordinates") {
  std::vector<double> x, y;
  for (double l = 16; l <= 512; l *= 2) {
    x.push_back(l);
    y.push_back(0.3 * std::pow(l, 2.0 / 3.0));
  }
  const LinearFit f = loglog_fit(x, y);
  CHECK(f.slope == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(0.3)).epsilon(1e-12));
}

TEST_CASE("noisy data has r2 below one") {
  const std::vector<double> x{0, 1, 2, 3}, y{0, 1.2, 1.8, 3.1};
  const LinearFit f = linear_fit(x, y);
  CHECK(f.r2 < 1.0);
  CHECK(f.r2 > 0.9);
}

TEST_CASE("degenerate inputs") {
  const std::vector<double> one{1.0}, two{1.0, 1.0}, neg{-1.0, 2.0};
  CHECK_THROWS_AS(linear_fit(one, one), ConfigError);
  CHECK_THROWS_AS(linear_fit(two, std::vector<double>{1.0, 2.0}), ConfigError);
  CHECK_THROWS_AS(loglog_fit(neg, std::vector<double>{1.0, 2.0}), ConfigError);
}
