#pragma once

#include <complex>
#include <span>

#include "dlab/numerics.hpp"

namespace dlab::fft {

// Thin wrappers over cached FFTW plans. Forward transforms are
// unnormalized; inverse transforms do not divide by N^d either.

void forward(const TorusGrid& grid, std::span<cplx> data);
void backward(const TorusGrid& grid, std::span<cplx> data);

/// Real-to-half-complex transform of a 2D (or 1D) real array.
/// The spectrum has n * (n/2 + 1) entries in 2D, n/2 + 1 in 1D.
void forward_real(const TorusGrid& grid, const double* in, cplx* out);
/// Destroys its input.
void backward_real(const TorusGrid& grid, cplx* in, double* out);
std::size_t half_spectrum_size(const TorusGrid& grid);

/// Type-I sine transform (unnormalized, FFTW RODFT00) along both axes
/// of an m x m array, or along the single axis when dim = 1.
void sine_transform(int m, int dim, double* data);

}  // namespace dlab::fft
