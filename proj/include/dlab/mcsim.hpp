#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dlab/moments.hpp"
#include "dlab/numerics.hpp"
#include "dlab/profiles.hpp"

namespace dlab {

struct SimConfig {
  double nu = 0.0;
  double kappa = 0.0;
  int ell = 0;
  ProfileFamily family;
  int n = 128;
  double dt = 0.0;
  double t_final = 0.0;
  int n_paths = 2;
  std::uint64_t seed = 0;
  /// Pair paths 2i and 2i+1 with increments dW and -dW.
  bool antithetic = true;
  /// Step indices at which the empirical two-point correlation is stored.
  std::vector<long> checkpoints;
  /// Initial field; default normalized e^{iy}.
  std::optional<Field> initial;
  int threads = 1;

  /// T / dt, checked to be integral.
  long steps() const;
};

/// One Strang step: half heat, phase exp(-i sqrt(2 kappa) ell sum_j u_j dW_j), half heat.
Field step_path(const Field& phi, std::span<const double> increments, const SimConfig& config);

struct CorrelationCheckpoint {
  long step = 0;
  double t = 0.0;
  /// Path average of phi(y) conj(phi(y')).
  Field mean;
  /// sqrt(sum over entries of the squared standard error).
  double se_aggregate = 0.0;
};

struct EnsembleStats {
  std::vector<double> t;
  /// Sample mean of ||phi||^2 and its standard error.
  std::vector<double> mean_norm2;
  std::vector<double> stderr_norm2;
  std::vector<CorrelationCheckpoint> checkpoints;
  /// Independent samples behind the standard errors (pairs when antithetic).
  int effective_samples = 0;
};

EnsembleStats run_ensemble(const SimConfig& config);

struct LowerBoundReport {
  double y0 = 0.0;
  int n0 = 0;
  double lambda = 0.0;
  double beta = 0.0;
  std::vector<double> t;
  /// ||E phi(t)|| from paths, with a standard error from the delta method.
  std::vector<double> mc_norm;
  std::vector<double> mc_stderr;
  /// The same quantity from the deterministic pinned equation.
  std::vector<double> det_norm;
  double max_z = 0.0;
  /// nu * Rayleigh quotient of the initial quasimode.
  double nu_rayleigh = 0.0;
  /// Fitted terminal rate of the deterministic norm.
  double det_rate = 0.0;
  /// det_norm(t) >= exp(-nu R t) at every recorded time (up to 1e-12).
  bool bound_holds = false;
};

/// Simulates the recentered SPDE started from the quasimode at y0.
LowerBoundReport lower_bound_experiment(const ProfileFamily& family, double y0, const SimConfig& config);

}  // namespace dlab
