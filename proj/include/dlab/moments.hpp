#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dlab/numerics.hpp"
#include "dlab/schrodinger.hpp"

namespace dlab {

struct MomentParams {
  double nu = 0.0;
  double kappa = 0.0;
  int ell = 0;
};

/// Coefficient of V in the two-point equation: kappa * ell^2.
double two_point_coupling(const MomentParams& p);

/// lambda such that the generator is nu (-Delta + lambda^2 V): ell sqrt(kappa / nu).
double effective_lambda(const MomentParams& p);

/// g(y, y') on a 2D grid, y indexing rows.
struct MomentState {
  Field g;
  double t = 0.0;
  MomentParams params;
};

MomentState init_rank_one(const Field& phi, const MomentParams& params);

/// h * sum_i g(y_i, y_i). Throws InvariantError below -1e-10 max|g|.
double trace_diag(const MomentState& state);

struct TracePoint {
  double t = 0.0;
  double trace = 0.0;
};

struct EvolveOptions {
  /// Record the trace every this many steps (the final step is always recorded).
  int record_every = 1;
  /// Estimate of the smallest eigenvalue of -Delta + lambda_eff^2 V, used to
  /// check the step-size rule.
  std::optional<double> mu_estimate;
};

struct EvolveResult {
  MomentState state;
  std::vector<TracePoint> series;
  /// Largest |g - g^H| / max|g| seen at recorded steps, before the final
  /// state is projected onto Hermitian kernels.
  double hermitian_defect = 0.0;
  std::vector<std::string> warnings;
};

/// Strang splitting: half heat step, exact potential factor
/// exp(-kappa ell^2 V dt), half heat step. Consecutive half steps are merged.
EvolveResult evolve(MomentState state, const PotentialGrid& v, double dt, long steps, const EvolveOptions& opts = {});

/// dt = factor / (nu mu_est).
double recommended_dt(const MomentParams& p, double mu_estimate, double factor = 0.02);

/// Smallest eigenvalue of g as an integral kernel (h-weighted matrix).
double kernel_min_eigenvalue(const MomentState& state);

/// max |g(y,y') - conj g(y',y)|.
double hermitian_defect(const Field& g);

struct WindowPolicy {
  double terminal_fraction = 0.5;
  double linearity_tol = 1e-3;
  double min_efolds = 2.0;
  double min_r2 = 0.999;
};

struct DecayFit {
  double rate = 0.0;
  double intercept = 0.0;
  double t_a = 0.0, t_b = 0.0;
  double r2 = 0.0;
  std::size_t window_points = 0;
  /// Reference rate and relative gap |rate - ref| / ref, when provided.
  std::optional<double> nu_mu;
  std::optional<double> rel_gap;
};

DecayFit fit_decay(const std::vector<TracePoint>& series, const WindowPolicy& policy = {},
                   std::optional<double> reference_rate = std::nullopt);

/// Normalized e^{iy}.
Field default_initial_phi(const TorusGrid& grid1d);

}  // namespace dlab
