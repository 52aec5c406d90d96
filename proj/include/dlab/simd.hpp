#pragma once

#include <complex>
#include <cstddef>
#include <string_view>

namespace dlab::simd {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

/// One implementation of each data-parallel inner loop.
///
/// Elementwise kernels give bit-identical results across tables.
/// Reductions (dot, sum_abs2) may differ in the last bits because
/// the summation order depends on the vector width.
struct KernelTable {
  Isa isa;
  /// z[i] *= w[i]
  void (*scale_real)(cplx* z, const double* w, std::size_t n);
  /// z[i] *= w[i]
  void (*mul_complex)(cplx* z, const cplx* w, std::size_t n);
  /// x[i] *= a
  void (*scale)(double a, double* x, std::size_t n);
  /// y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// sum x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  /// y[i] += c * v[i] * x[i]
  void (*diag_axpy)(double c, const double* v, const double* x, double* y, std::size_t n);
  /// sum |z[i]|^2
  double (*sum_abs2)(const cplx* z, std::size_t n);
};

const KernelTable& scalar_table();

/// Null when the AVX2 table was not compiled in.
const KernelTable* avx2_table();

/// True when the running CPU supports AVX2 and FMA.
bool cpu_has_avx2();

/// Table used by the library. Chosen once: AVX2 when compiled in and
/// supported, unless the environment sets DLAB_SIMD=scalar.
const KernelTable& active();

/// Override the active table (tests and benchmarks).
void select(Isa isa);

std::string_view name(Isa isa);

}  // namespace dlab::simd
