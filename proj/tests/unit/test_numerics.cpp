#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "dlab/error.hpp"
#include "dlab/fft.hpp"
#include "dlab/numerics.hpp"

using namespace dlab;

namespace {

Field random_field(const TorusGrid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Field f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = cplx(n(rng), n(rng));
  return f;
}

double max_diff(const Field& a, const Field& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("grid rejects sizes that are not powers of two") {
  CHECK_THROWS_AS(TorusGrid(100, 1), ConfigError);
  CHECK_THROWS_AS(TorusGrid(8, 1), ConfigError);
  CHECK_THROWS_AS(TorusGrid(64, 3), ConfigError);
  const TorusGrid g(64, 2);
  CHECK(g.size() == 4096);
  CHECK(g.spacing() == doctest::Approx(2 * M_PI / 64));
  CHECK(g.wavenumber(33) == -31);
  CHECK(g.wavenumber(32) == 32);
  CHECK(g.derivative_wavenumber(32) == 0);
}

TEST_CASE("fft round trip") {
  for (int dim : {1, 2}) {
    const TorusGrid g(32, dim);
    const Field f = random_field(g, 3 + dim);
    Field h = f;
    fft::forward(g, h.values());
    fft::backward(g, h.values());
    for (auto& v : h.values()) v /= double(g.size());
    CHECK(max_diff(f, h) < 1e-13);
  }
}

TEST_CASE("heat semigroup identity") {
  const TorusGrid g(64, 2);
  const Field f = random_field(g, 5);
  const Field a = heat_step(heat_step(f, 0.3, 0.7), 0.3, 1.1);
  const Field b = heat_step(f, 0.3, 1.8);
  CHECK(max_diff(a, b) < 1e-12);
  // nu = 0 is the identity.
  CHECK(max_diff(heat_step(f, 0.0, 3.0), f) < 1e-13);
}

TEST_CASE("heat step damps a Fourier mode at the exact rate") {
  const TorusGrid g(32, 1);
  const Field f = sample(g, [](double y) { return cplx(std::cos(3 * y), std::sin(3 * y)); });
  const Field h = heat_step(f, 0.5, 0.2);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(h[i] - std::exp(-0.5 * 9 * 0.2) * f[i]) < 1e-14);
}

TEST_CASE("laplacian and norms of a trigonometric field") {
  const TorusGrid g(64, 2);
  const Field f = sample(g, [](double y, double x) { return cplx(std::sin(2 * y) * std::cos(x), 0.0); });
  const Field lf = laplacian_apply(f);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(lf[i] - 5.0 * f[i]) < 1e-11);
  // ||sin 2y cos x||^2 = pi^2 on the 2-torus.
  CHECK(l2_norm(f) == doctest::Approx(M_PI));
  CHECK(h1_seminorm(f) == doctest::Approx(std::sqrt(5.0) * M_PI));
}

TEST_CASE("field io round trips") {
  const auto dir = std::filesystem::temp_directory_path() / "dlab_field_io";
  std::filesystem::create_directories(dir);
  const Field f = random_field(TorusGrid(16, 2), 9);
  write_field_binary(f, (dir / "f.bin").string());
  const Field b = read_field_binary((dir / "f.bin").string());
  CHECK(b.grid() == f.grid());
  CHECK(max_diff(b, f) == 0.0);
  write_field_csv(f, (dir / "f.csv").string());
  const Field c = read_field_csv((dir / "f.csv").string());
  CHECK(max_diff(c, f) == 0.0);
  CHECK_THROWS_AS(read_field_binary((dir / "missing.bin").string()), ConfigError);
}
