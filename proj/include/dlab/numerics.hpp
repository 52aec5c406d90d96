#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace dlab {

using cplx = std::complex<double>;

/// Uniform periodic grid on the 1- or 2-torus of side 2*pi.
class TorusGrid {
 public:
  TorusGrid() = default;
  /// Throws ConfigError unless n is a power of two >= 16 and dim is 1 or 2.
  TorusGrid(int n, int dim);

  int n() const { return n_; }
  int dim() const { return dim_; }
  std::size_t size() const;
  double spacing() const;
  /// Quadrature weight h^d.
  double cell_volume() const;
  double coordinate(int i) const;
  /// Signed wavenumber of FFT index i, in {-N/2+1, ..., N/2}.
  int wavenumber(int i) const;
  /// Wavenumber used for first derivatives (Nyquist mapped to 0).
  int derivative_wavenumber(int i) const;

  bool operator==(const TorusGrid&) const = default;

 private:
  int n_ = 0;
  int dim_ = 0;
};

/// Complex samples on a TorusGrid, row-major for d = 2 (first index y).
class Field {
 public:
  Field() = default;
  explicit Field(const TorusGrid& grid);
  Field(const TorusGrid& grid, std::vector<cplx> values);

  const TorusGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }
  cplx& operator[](std::size_t i) { return values_[i]; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }
  cplx& operator()(int i, int j) { return values_[static_cast<std::size_t>(i) * grid_.n() + j]; }
  const cplx& operator()(int i, int j) const {
    return values_[static_cast<std::size_t>(i) * grid_.n() + j];
  }

  bool all_finite() const;

 private:
  TorusGrid grid_;
  std::vector<cplx> values_;
};

/// Samples f at the grid points; f takes one coordinate per dimension.
template <class F>
Field sample(const TorusGrid& grid, F&& f) {
  Field out(grid);
  const int n = grid.n();
  if constexpr (std::is_invocable_v<F, double>) {
    for (int i = 0; i < n; ++i) out[i] = f(grid.coordinate(i));
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j) = f(grid.coordinate(i), grid.coordinate(j));
  }
  return out;
}

/// Exact heat semigroup e^{nu dt Delta} applied in Fourier space.
Field heat_step(const Field& f, double nu, double dt);

/// Precomputed heat multiplier for repeated steps of the same length.
class HeatPropagator {
 public:
  HeatPropagator(const TorusGrid& grid, double nu, double dt);
  /// In place: forward transform, multiply, inverse transform.
  void apply(Field& f) const;
  /// Multiplier on the unnormalized spectrum (includes 1/N^d).
  std::span<const double> multiplier() const { return mult_; }

 private:
  TorusGrid grid_;
  std::vector<double> mult_;
};

double l2_norm(const Field& f);
cplx inner(const Field& a, const Field& b);
double h1_seminorm(const Field& f);

/// Spectral -Delta.
Field laplacian_apply(const Field& f);

/// |k|^2 on the FFT index layout of the grid, Nyquist included.
std::vector<double> laplacian_symbol(const TorusGrid& grid);

/// Field IO. CSV has a header line and columns index,real,imag.
/// Binary: u32 N, u32 d (little endian), then interleaved
/// (real, imag) f64 pairs in row-major order.
void write_field_csv(const Field& f, const std::string& path);
Field read_field_csv(const std::string& path);
void write_field_binary(const Field& f, const std::string& path);
Field read_field_binary(const std::string& path);

}  // namespace dlab
