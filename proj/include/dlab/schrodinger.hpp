#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "dlab/numerics.hpp"
#include "dlab/profiles.hpp"

namespace dlab {

/// Potential sampled on a torus grid.
struct PotentialGrid {
  TorusGrid grid;
  std::vector<double> values;
  bool nonneg = true;
  std::string provenance;
  double max_value = 0.0;
};

/// V(y, y') = sum_j (u_j(y) - u_j(y'))^2, rows indexed by y.
PotentialGrid assemble_potential_2d(const ProfileFamily& family, const TorusGrid& grid);

/// V0(y) = sum_j (u_j(y) - u_j(y0))^2.
PotentialGrid assemble_potential_1d(const ProfileFamily& family, const TorusGrid& grid, double y0);

PotentialGrid constant_potential(const TorusGrid& grid, double value);

enum class EigenMethod { automatic, krylov, dense };

struct EigenOptions {
  /// Residual tolerance; default 1e-6 * (lambda^2 max V + N^2).
  std::optional<double> tol_eig;
  EigenMethod method = EigenMethod::automatic;
  /// Initial vector for the Krylov solve (real, grid layout).
  std::vector<double> start;
  int max_matvecs = 60000;
};

struct EigenResult {
  double mu = 0.0;
  Field eigenvector;
  double residual = 0.0;
  double tol = 0.0;
  int n = 0;
  double lambda = 0.0;
  bool converged = false;
  int matvecs = 0;
  std::vector<std::string> warnings;
};

/// Smallest eigenvalue of -Delta + lambda^2 V on the torus.
EigenResult smallest_eigenvalue(const PotentialGrid& v, double lambda, const EigenOptions& opts = {});

/// N(lambda) = max(128, next power of two >= 16 sqrt(lambda)).
int grid_rule(double lambda);

/// Dense matrix of -Delta + lambda^2 V from the periodic spectral
/// differentiation formula (no FFT involved).
Eigen::MatrixXd dense_operator(const PotentialGrid& v, double lambda);

/// Spectral interpolation of a real grid function to a finer grid.
std::vector<double> spectral_refine(const TorusGrid& coarse, const std::vector<double>& values, const TorusGrid& fine);

struct ScalingPoint {
  double lambda = 0.0;
  double mu = 0.0;
  int n = 0;
  double residual = 0.0;
  /// Eigenvalue on the doubled grid and the relative change.
  double mu_refined = 0.0;
  double richardson_change = 0.0;
  bool converged = false;
  int matvecs = 0;
};

struct ScalingFit {
  std::vector<ScalingPoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int n0 = 0;
  double target = 0.0;
  std::vector<double> excluded;
};

struct ScalingOptions {
  std::optional<double> tol_eig;
  /// Maximum relative change allowed between N and 2N.
  double richardson_tol = 0.01;
  /// Force a fixed grid instead of the N(lambda) rule.
  std::optional<int> grid_override;
  bool richardson = true;
  int threads = 1;
};

ScalingFit scaling_study(const ProfileFamily& family, const std::vector<double>& lambdas,
                         const ScalingOptions& opts = {});

struct ModelProblemResult {
  double mu = 0.0;
  double residual = 0.0;
  double boundary_mass = 0.0;
  int m = 0, n = 0, sign = -1;
  double lambda = 0.0, half_width = 0.0;
  int points = 0;
  bool converged = false;
  std::vector<double> eigenvector;  // interior grid, row-major in x
  std::vector<std::string> warnings;
};

/// Smallest eigenvalue of -Delta + lambda^2 (x^m + sign * y^n)^2 on the
/// Dirichlet box [-R, R]^2, sine-spectral with `points` interior nodes
/// per axis (points + 1 should be a power of two).
ModelProblemResult model_problem_eig(int m, int n, int sign, double lambda, double half_width, int points,
                                     std::optional<double> tol = std::nullopt);

/// The exponent 2n / (2n + nm - m).
double model_problem_exponent(int m, int n);

}  // namespace dlab
