#include "dlab/simd.hpp"

namespace dlab::simd {
namespace {

void scale_real(cplx* z, const double* w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) z[i] *= w[i];
}

void mul_complex(cplx* z, const cplx* w, std::size_t n) {
  // Written out so the rounding matches the vector kernel exactly.
  for (std::size_t i = 0; i < n; ++i) {
    const double a = z[i].real(), b = z[i].imag();
    const double c = w[i].real(), d = w[i].imag();
    z[i] = cplx(a * c - b * d, a * d + b * c);
  }
}

void scale(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void diag_axpy(double c, const double* v, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += c * v[i] * x[i];
}

double sum_abs2(const cplx* z, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += z[i].real() * z[i].real() + z[i].imag() * z[i].imag();
  return s;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{Isa::scalar, scale_real, mul_complex, scale,
                             axpy,        dot,        diag_axpy,   sum_abs2};
  return t;
}

}  // namespace dlab::simd
