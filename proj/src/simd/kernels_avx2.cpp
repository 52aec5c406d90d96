// Compiled with -mavx2 -mfma. Elementwise kernels avoid fused
// multiply-add so they round exactly like the scalar table.
#include <immintrin.h>

#include "dlab/simd.hpp"

#pragma GCC optimize("fp-contract=off")

namespace dlab::simd {
namespace {

void scale_real(cplx* z, const double* w, std::size_t n) {
  auto* p = reinterpret_cast<double*>(z);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    // [w0 w0 w1 w1]
    const __m128d w2 = _mm_loadu_pd(w + i);
    const __m256d ww = _mm256_permute4x64_pd(_mm256_castpd128_pd256(w2), 0x50);
    __m256d v = _mm256_loadu_pd(p + 2 * i);
    _mm256_storeu_pd(p + 2 * i, _mm256_mul_pd(v, ww));
  }
  for (; i < n; ++i) z[i] *= w[i];
}

void mul_complex(cplx* z, const cplx* w, std::size_t n) {
  auto* p = reinterpret_cast<double*>(z);
  const auto* q = reinterpret_cast<const double*>(w);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d a = _mm256_loadu_pd(p + 2 * i);
    const __m256d b = _mm256_loadu_pd(q + 2 * i);
    const __m256d br = _mm256_movedup_pd(b);         // c c
    const __m256d bi = _mm256_permute_pd(b, 0xF);     // d d
    const __m256d as = _mm256_permute_pd(a, 0x5);     // b a
    const __m256d t1 = _mm256_mul_pd(a, br);          // ac bc
    const __m256d t2 = _mm256_mul_pd(as, bi);         // bd ad
    _mm256_storeu_pd(p + 2 * i, _mm256_addsub_pd(t1, t2));
  }
  for (; i < n; ++i) {
    const double a = z[i].real(), b = z[i].imag();
    const double c = w[i].real(), d = w[i].imag();
    z[i] = cplx(a * c - b * d, a * d + b * c);
  }
}

void scale(double a, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), t));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4) s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void diag_axpy(double c, const double* v, const double* x, double* y, std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_mul_pd(_mm256_mul_pd(vc, _mm256_loadu_pd(v + i)), _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), t));
  }
  for (; i < n; ++i) y[i] += c * v[i] * x[i];
}

double sum_abs2(const cplx* z, std::size_t n) {
  const auto* p = reinterpret_cast<const double*>(z);
  return dot(p, p, 2 * n);
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable t{Isa::avx2, scale_real, mul_complex, scale,
                             axpy,      dot,        diag_axpy,   sum_abs2};
  return &t;
}

}  // namespace dlab::simd
