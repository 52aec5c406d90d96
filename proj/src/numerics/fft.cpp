#include "dlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "dlab/error.hpp"

namespace dlab::fft {
namespace {

enum class Kind { c2c_forward, c2c_backward, r2c, c2r, dst1 };

// FFTW plans may be executed on new arrays only when those arrays share the
// alignment of the arrays used at planning time, so alignment is part of
// the key.
using Key = std::tuple<Kind, int, int, int, int, bool>;

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }

  fftw_plan get(Kind kind, int n, int dim, const void* in, void* out) {
    const int ain = fftw_alignment_of(const_cast<double*>(static_cast<const double*>(in)));
    const int aout = fftw_alignment_of(static_cast<double*>(out));
    const Key key{kind, n, dim, ain, aout, in == out};
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    fftw_plan p = make(kind, n, dim, ain, aout, in == out);
    if (p == nullptr) throw Error("numerics", "fft", "FFTW failed to create a plan");
    plans_.emplace(key, p);
    return p;
  }

 private:
  static fftw_plan make(Kind kind, int n, int dim, int ain, int aout, bool in_place) {
    const std::size_t total = dim == 1 ? n : static_cast<std::size_t>(n) * n;
    const std::size_t bytes = 2 * (total + 2 * n) * sizeof(double) + 64;
    auto* bin = static_cast<char*>(fftw_malloc(bytes));
    auto* bout = in_place ? bin : static_cast<char*>(fftw_malloc(bytes));
    double* pin = reinterpret_cast<double*>(bin + ain);
    double* pout = reinterpret_cast<double*>(bout + aout);
    const unsigned flags = FFTW_ESTIMATE;
    int dims[2] = {n, n};
    fftw_plan p = nullptr;
    switch (kind) {
      case Kind::c2c_forward:
      case Kind::c2c_backward:
        p = fftw_plan_dft(dim, dims, reinterpret_cast<fftw_complex*>(pin),
                          reinterpret_cast<fftw_complex*>(pout),
                          kind == Kind::c2c_forward ? FFTW_FORWARD : FFTW_BACKWARD, flags);
        break;
      case Kind::r2c:
        p = fftw_plan_dft_r2c(dim, dims, pin, reinterpret_cast<fftw_complex*>(pout), flags);
        break;
      case Kind::c2r:
        p = fftw_plan_dft_c2r(dim, dims, reinterpret_cast<fftw_complex*>(pin), pout, flags);
        break;
      case Kind::dst1: {
        fftw_r2r_kind kinds[2] = {FFTW_RODFT00, FFTW_RODFT00};
        p = fftw_plan_r2r(dim, dims, pin, pout, kinds, flags);
        break;
      }
    }
    fftw_free(bin);
    if (!in_place) fftw_free(bout);
    return p;
  }

  std::mutex mutex_;
  std::map<Key, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

void check(const TorusGrid& grid, std::size_t size) {
  if (size != grid.size()) throw Error("numerics", "fft", "array length does not match grid");
}

}  // namespace

void forward(const TorusGrid& grid, std::span<cplx> data) {
  check(grid, data.size());
  fftw_plan p = cache().get(Kind::c2c_forward, grid.n(), grid.dim(), data.data(), data.data());
  fftw_execute_dft(p, as_fftw(data.data()), as_fftw(data.data()));
}

void backward(const TorusGrid& grid, std::span<cplx> data) {
  check(grid, data.size());
  fftw_plan p = cache().get(Kind::c2c_backward, grid.n(), grid.dim(), data.data(), data.data());
  fftw_execute_dft(p, as_fftw(data.data()), as_fftw(data.data()));
}

std::size_t half_spectrum_size(const TorusGrid& grid) {
  const std::size_t h = grid.n() / 2 + 1;
  return grid.dim() == 1 ? h : h * grid.n();
}

void forward_real(const TorusGrid& grid, const double* in, cplx* out) {
  fftw_plan p = cache().get(Kind::r2c, grid.n(), grid.dim(), in, out);
  fftw_execute_dft_r2c(p, const_cast<double*>(in), as_fftw(out));
}

void backward_real(const TorusGrid& grid, cplx* in, double* out) {
  fftw_plan p = cache().get(Kind::c2r, grid.n(), grid.dim(), in, out);
  fftw_execute_dft_c2r(p, as_fftw(in), out);
}

void sine_transform(int m, int dim, double* data) {
  fftw_plan p = cache().get(Kind::dst1, m, dim, data, data);
  fftw_execute_r2r(p, data, data);
}

}  // namespace dlab::fft
