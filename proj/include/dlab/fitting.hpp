#pragma once

#include <span>

namespace dlab {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  /// Largest absolute residual.
  double max_residual = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Fit of log y against log x.
LinearFit loglog_fit(std::span<const double> x, std::span<const double> y);

}  // namespace dlab
