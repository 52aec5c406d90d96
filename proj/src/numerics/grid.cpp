#include <cmath>
#include <numbers>

#include "dlab/error.hpp"
#include "dlab/fft.hpp"
#include "dlab/numerics.hpp"
#include "dlab/simd.hpp"

namespace dlab {

TorusGrid::TorusGrid(int n, int dim) : n_(n), dim_(dim) {
  if (dim != 1 && dim != 2) throw ConfigError("numerics", "TorusGrid", "dimension must be 1 or 2");
  if (n < 16 || (n & (n - 1)) != 0)
    throw ConfigError("numerics", "TorusGrid", "N must be a power of two >= 16, got " + std::to_string(n));
}

std::size_t TorusGrid::size() const {
  return dim_ == 1 ? static_cast<std::size_t>(n_) : static_cast<std::size_t>(n_) * n_;
}

double TorusGrid::spacing() const { return 2.0 * std::numbers::pi / n_; }

double TorusGrid::cell_volume() const { return dim_ == 1 ? spacing() : spacing() * spacing(); }

double TorusGrid::coordinate(int i) const { return i * spacing(); }

int TorusGrid::wavenumber(int i) const { return i <= n_ / 2 ? i : i - n_; }

int TorusGrid::derivative_wavenumber(int i) const { return i == n_ / 2 ? 0 : wavenumber(i); }

Field::Field(const TorusGrid& grid) : grid_(grid), values_(grid.size()) {}

Field::Field(const TorusGrid& grid, std::vector<cplx> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw Error("numerics", "Field", "value count does not match grid");
}

bool Field::all_finite() const {
  for (const auto& v : values_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

std::vector<double> laplacian_symbol(const TorusGrid& grid) {
  const int n = grid.n();
  std::vector<double> k2(grid.size());
  if (grid.dim() == 1) {
    for (int i = 0; i < n; ++i) {
      const double k = grid.wavenumber(i);
      k2[i] = k * k;
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const double ki = grid.wavenumber(i);
      for (int j = 0; j < n; ++j) {
        const double kj = grid.wavenumber(j);
        k2[static_cast<std::size_t>(i) * n + j] = ki * ki + kj * kj;
      }
    }
  }
  return k2;
}

namespace {

void require_same_grid(const Field& a, const Field& b, const char* op) {
  if (!(a.grid() == b.grid())) throw ConfigError("numerics", op, "fields live on different grids");
}

}  // namespace

HeatPropagator::HeatPropagator(const TorusGrid& grid, double nu, double dt) : grid_(grid) {
  if (!(nu >= 0.0) || !(dt >= 0.0)) throw ConfigError("numerics", "heat_step", "need nu >= 0 and dt >= 0");
  mult_ = laplacian_symbol(grid);
  const double norm = 1.0 / static_cast<double>(grid.size());
  for (auto& m : mult_) m = std::exp(-nu * m * dt) * norm;
}

void HeatPropagator::apply(Field& f) const {
  if (!(f.grid() == grid_)) throw ConfigError("numerics", "heat_step", "field grid differs from propagator grid");
  fft::forward(grid_, f.values());
  simd::active().scale_real(f.values().data(), mult_.data(), mult_.size());
  fft::backward(grid_, f.values());
}

Field heat_step(const Field& f, double nu, double dt) {
  Field out = f;
  HeatPropagator(f.grid(), nu, dt).apply(out);
  return out;
}

double l2_norm(const Field& f) {
  return std::sqrt(simd::active().sum_abs2(f.values().data(), f.size()) * f.grid().cell_volume());
}

cplx inner(const Field& a, const Field& b) {
  require_same_grid(a, b, "inner");
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
  return s * a.grid().cell_volume();
}

Field laplacian_apply(const Field& f) {
  Field out = f;
  std::vector<double> k2 = laplacian_symbol(f.grid());
  const double norm = 1.0 / static_cast<double>(f.size());
  for (auto& v : k2) v *= norm;
  fft::forward(f.grid(), out.values());
  simd::active().scale_real(out.values().data(), k2.data(), k2.size());
  fft::backward(f.grid(), out.values());
  return out;
}

double h1_seminorm(const Field& f) {
  Field spec = f;
  fft::forward(f.grid(), spec.values());
  const std::vector<double> k2 = laplacian_symbol(f.grid());
  double s = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) s += k2[i] * std::norm(spec[i]);
  return std::sqrt(s * f.grid().cell_volume() / static_cast<double>(f.size()));
}

}  // namespace dlab
