#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "dlab/numerics.hpp"
#include "dlab/profiles.hpp"

namespace dlab {

/// Dirichlet ground state of -d^2/dz^2 + c z^(2 n0 + 2) on [-R, R].
struct AnharmonicGroundState {
  int n0 = 0;
  double c = 0.0;
  double half_width = 0.0;
  int points = 0;
  double mu0 = 0.0;
  /// Interior nodes and the ground function, unit L2 norm, positive.
  std::vector<double> z;
  std::vector<double> p;
  /// L2 mass fraction on |z| > 0.9 R.
  double boundary_mass = 0.0;

  /// Cubic interpolation of p; zero outside the box.
  double operator()(double zz) const;
};

/// R defaults to 6 c^(-1/(2 n0 + 4)); doubled up to three times until the
/// outer-10% mass is below 1e-6.
AnharmonicGroundState anharmonic_ground(int n0, double c, std::optional<double> half_width = std::nullopt,
                                        int points = 4096);

/// Open interval of admissible cutoff exponents beta.
std::pair<double, double> beta_interval(int n0);
double default_beta(int n0);

/// Smooth cutoff: 1 on |s| <= 4pi/5, 0 on |s| >= 8pi/9.
double cutoff(double s, double plateau = 0.8 * 3.141592653589793, double support = 8.0 / 9.0 * 3.141592653589793);

struct QuasimodeOptions {
  double plateau = 0.8 * 3.141592653589793;
  double support = 8.0 / 9.0 * 3.141592653589793;
};

/// q(y) = chi(lambda^beta (y - y0)) p(lambda^(1/(n0+2)) (y - y0)), unit norm.
Field build_quasimode(const AnharmonicGroundState& gs, double lambda, double beta, double y0, const TorusGrid& grid,
                      const QuasimodeOptions& opts = {});

/// |q|_{H1}^2 + lambda^2 * sum V0 |q|^2 h.
double rayleigh(const Field& q, const ProfileFamily& family, double y0, double lambda);

/// Leading coefficient of V0 at y0: sum of squared leading coefficients of
/// the profiles whose critical order at y0 equals the overlap order there.
double pinned_coefficient(const ProfileFamily& family, double y0, int n0);

struct QuasimodePoint {
  double lambda = 0.0;
  double rayleigh = 0.0;
  double ratio = 0.0;
  /// Smallest eigenvalue of the pinned 1D operator (Rayleigh-Ritz floor).
  double mu_min = 0.0;
  double y0 = 0.0;
};

struct QuasimodeReport {
  int n0 = 0;
  double beta = 0.0;
  std::pair<double, double> interval;
  double c = 0.0;
  double mu0 = 0.0;
  std::vector<QuasimodePoint> points;
  /// (max - min) / min of the ratio over lambda >= lambda_max / 10.
  double top_decade_variation = 0.0;
};

struct QuasimodeStudyOptions {
  std::optional<double> beta;
  int grid_points = 2048;
  bool with_eigenvalue = true;
  QuasimodeOptions cutoff;
};

/// Runs the certification at y0, or at every maximal-order overlap point
/// (keeping the smaller quotient per lambda) when y0 is not given.
QuasimodeReport quasimode_study(const ProfileFamily& family, std::optional<double> y0,
                                const std::vector<double>& lambdas, const QuasimodeStudyOptions& opts = {});

}  // namespace dlab
