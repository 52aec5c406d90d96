#include <doctest.h>

#include <cmath>

#include "dlab/error.hpp"
#include "dlab/linalg.hpp"
#include "dlab/schrodinger.hpp"

using namespace dlab;

TEST_CASE("Mathieu oracle: -d2 + lambda^2 sin^2 y on the circle") {
  // lambda^2 / 2 + a_0(lambda^2 / 4), Mathieu characteristic values.
  const double lambdas[] = {2.0, 5.0, 10.0};
  const double expected[] = {1.5448613958925863, 4.73295219985943, 9.74322045343321};
  const ProfileFamily fam({ShearProfile::sine()});
  for (int i = 0; i < 3; ++i) {
    const PotentialGrid v = assemble_potential_1d(fam, TorusGrid(64, 1), 0.0);
    EigenOptions o;
    o.method = EigenMethod::krylov;
    const EigenResult r = smallest_eigenvalue(v, lambdas[i], o);
    CHECK(r.converged);
    CHECK(r.mu == doctest::Approx(expected[i]).epsilon(1e-9));
    o.method = EigenMethod::dense;
    CHECK(smallest_eigenvalue(v, lambdas[i], o).mu == doctest::Approx(expected[i]).epsilon(1e-9));
  }
}

TEST_CASE("dense and Krylov routes agree on the two-point operator") {
  const ProfileFamily fam({ShearProfile::sine(), ShearProfile::cosine()});
  const PotentialGrid v = assemble_potential_2d(fam, TorusGrid(16, 2));
  for (double lam : {1.0, 4.0, 12.0}) {
    EigenOptions o;
    o.method = EigenMethod::dense;
    const double d = smallest_eigenvalue(v, lam, o).mu;
    o.method = EigenMethod::krylov;
    const EigenResult k = smallest_eigenvalue(v, lam, o);
    CHECK(k.converged);
    CHECK(k.mu == doctest::Approx(d).epsilon(1e-8));
    // Independent full spectrum of the explicit matrix.
    const Eigen::VectorXd ev = linalg::eigvalsh(dense_operator(v, lam));
    CHECK(ev[0] == doctest::Approx(d).epsilon(1e-10));
  }
}

TEST_CASE("two-point potential is symmetric, nonnegative and vanishes on the diagonal") {
  const ProfileFamily fam({ShearProfile::sine(), ShearProfile({0.0, 0.3}, {0.0, 1.0})});
  const TorusGrid g(32, 2);
  const PotentialGrid v = assemble_potential_2d(fam, g);
  CHECK(v.nonneg);
  for (int i = 0; i < 32; ++i) {
    CHECK(v.values[i * 32 + i] == 0.0);
    for (int j = 0; j < 32; ++j) {
      CHECK(v.values[i * 32 + j] >= 0.0);
      CHECK(v.values[i * 32 + j] == doctest::Approx(v.values[j * 32 + i]));
    }
  }
}

TEST_CASE("eigenvalue is monotone in lambda and zero without potential") {
  const ProfileFamily fam({ShearProfile::sine()});
  const PotentialGrid v = assemble_potential_2d(fam, TorusGrid(32, 2));
  double prev = -1;
  for (double lam : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double mu = smallest_eigenvalue(v, lam).mu;
    CHECK(mu > prev);
    prev = mu;
  }
  CHECK(std::abs(smallest_eigenvalue(v, 0.0).mu) < 1e-8);
}

TEST_CASE("grid rule") {
  CHECK(grid_rule(1.0) == 128);
  CHECK(grid_rule(400.0) == 512);
  CHECK(grid_rule(100.0) == 256);
}

TEST_CASE("model problem is symmetric under swapping the axes") {
  // (x - y^2)^2 and (x^2 - y)^2 are mirror images, so (1,2) and (2,1) share
  // their spectrum on the square box.
  const auto a = model_problem_eig(1, 2, -1, 32.0, 2.0, 127);
  const auto b = model_problem_eig(2, 1, -1, 32.0, 2.0, 127);
  CHECK(a.converged);
  CHECK(b.converged);
  CHECK(a.mu == doctest::Approx(b.mu).epsilon(1e-8));
  const auto fine = model_problem_eig(1, 2, -1, 32.0, 2.0, 255);
  CHECK(fine.mu == doctest::Approx(a.mu).epsilon(1e-5));
  CHECK(model_problem_exponent(1, 1) == doctest::Approx(1.0));
  CHECK(model_problem_exponent(1, 2) == doctest::Approx(0.8));
  CHECK(model_problem_exponent(2, 1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(model_problem_eig(0, 1, -1, 1.0, 2.0, 31), ConfigError);
}
