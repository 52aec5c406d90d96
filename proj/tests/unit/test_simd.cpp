#include <doctest.h>

#include <random>
#include <vector>

#include "dlab/simd.hpp"

using namespace dlab::simd;

namespace {

struct Data {
  std::vector<cplx> z, w;
  std::vector<double> x, y, v;
};

Data make(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Data d;
  for (std::size_t i = 0; i < n; ++i) {
    d.z.emplace_back(g(rng), g(rng));
    d.w.emplace_back(g(rng), g(rng));
    d.x.push_back(g(rng));
    d.y.push_back(g(rng));
    d.v.push_back(std::abs(g(rng)));
  }
  return d;
}

const std::size_t kSizes[] = {0, 1, 2, 3, 5, 7, 8, 17, 64, 1001};

}  // namespace

TEST_CASE("avx2 elementwise kernels match the scalar table bit for bit") {
  const KernelTable* fast = avx2_table();
  if (!fast || !cpu_has_avx2()) {
    MESSAGE("AVX2 table not available on this build or CPU");
    return;
  }
  const KernelTable& ref = scalar_table();
  for (std::size_t n : kSizes) {
    CAPTURE(n);
    Data a = make(n, 11 + n), b = a;
    ref.scale_real(a.z.data(), a.v.data(), n);
    fast->scale_real(b.z.data(), b.v.data(), n);
    CHECK(a.z == b.z);
    ref.mul_complex(a.z.data(), a.w.data(), n);
    fast->mul_complex(b.z.data(), b.w.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a.z[i] - b.z[i]) <= 1e-15 * std::abs(a.z[i]));
    ref.scale(0.37, a.x.data(), n);
    fast->scale(0.37, b.x.data(), n);
    CHECK(a.x == b.x);
    ref.axpy(-1.3, a.x.data(), a.y.data(), n);
    fast->axpy(-1.3, b.x.data(), b.y.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(a.y[i] == doctest::Approx(b.y[i]).epsilon(1e-15));
    ref.diag_axpy(2.5, a.v.data(), a.x.data(), a.y.data(), n);
    fast->diag_axpy(2.5, b.v.data(), b.x.data(), b.y.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(a.y[i] == doctest::Approx(b.y[i]).epsilon(1e-14));
  }
}

TEST_CASE("avx2 reductions agree with the scalar table to rounding") {
  const KernelTable* fast = avx2_table();
  if (!fast || !cpu_has_avx2()) return;
  const KernelTable& ref = scalar_table();
  for (std::size_t n : kSizes) {
    CAPTURE(n);
    const Data d = make(n, 99 + n);
    double scale = 0;
    for (std::size_t i = 0; i < n; ++i) scale += std::abs(d.x[i] * d.y[i]);
    CHECK(std::abs(ref.dot(d.x.data(), d.y.data(), n) - fast->dot(d.x.data(), d.y.data(), n)) <= 1e-14 * (scale + 1));
    const double s = ref.sum_abs2(d.z.data(), n);
    CHECK(fast->sum_abs2(d.z.data(), n) == doctest::Approx(s).epsilon(1e-14));
  }
}

TEST_CASE("dispatch can be forced to either table") {
  select(Isa::scalar);
  CHECK(active().isa == Isa::scalar);
  if (avx2_table() && cpu_has_avx2()) {
    select(Isa::avx2);
    CHECK(active().isa == Isa::avx2);
  }
  CHECK(name(Isa::scalar) == "scalar");
}
