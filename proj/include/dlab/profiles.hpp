#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace dlab {

/// Real trigonometric polynomial u(y) = sum_k a_k cos(ky) + b_k sin(ky), k = 0..K.
class ShearProfile {
 public:
  ShearProfile() = default;
  /// a[k] multiplies cos(ky) for k = 0..; b[k] multiplies sin((k+1)y).
  ShearProfile(std::vector<double> a, std::vector<double> b);

  static ShearProfile sine(int k = 1, double amplitude = 1.0);
  static ShearProfile cosine(int k = 1, double amplitude = 1.0);
  static ShearProfile constant(double value);

  int degree() const { return static_cast<int>(a_.size()) - 1; }
  /// Cosine coefficient of wavenumber k (0 outside the degree).
  double a(int k) const;
  /// Sine coefficient of wavenumber k (0 for k = 0 or outside the degree).
  double b(int k) const;
  bool is_constant() const;

  double operator()(double y) const;
  /// Value of the order-th derivative at y.
  double derivative_at(int order, double y) const;
  /// Closed-form derivative of the given order.
  ShearProfile derivative(int order = 1) const;
  /// The same profile minus a constant.
  ShearProfile shifted(double offset) const;
  /// max_y |u(y)|, estimated on a dense grid.
  double max_abs() const;

 private:
  std::vector<double> a_;  // index k
  std::vector<double> b_;  // index k, b_[0] = 0
};

struct CriticalPoint {
  double y = 0.0;
  /// u', ..., u^(order) vanish, u^(order+1) does not.
  int order = 0;
  /// u^(order+1)(y) / (order+1)!
  double leading_coeff = 0.0;
};

struct CriticalPointOptions {
  double tol_root = 1e-8;
  double tol_order = 1e-8;
  /// Roots closer than this are one critical point.
  double merge_radius = 1e-6;
};

/// All zeros of u' in [0, 2pi) with their vanishing orders.
std::vector<CriticalPoint> critical_points(const ShearProfile& u, const CriticalPointOptions& opts = {});

/// Vanishing order of u' at y: 0 if u'(y) != 0, else the largest m with
/// u', ..., u^(m) all zero. Infinite for constant profiles.
int local_order(const ShearProfile& u, double y, double tol = 1e-8);

inline constexpr int kInfiniteOrder = std::numeric_limits<int>::max();

struct OverlapPoint {
  double y = 0.0;
  int order = 0;
};

struct OverlapResult {
  int n0 = 0;
  /// Indices of constant profiles, which never lower the order anywhere.
  std::vector<std::size_t> degenerate;
  /// Candidate locations with their overlap order (min over profiles).
  std::vector<OverlapPoint> candidates;
  /// Locations attaining n0.
  std::vector<double> maximizers;
};

class ProfileFamily {
 public:
  ProfileFamily() = default;
  explicit ProfileFamily(std::vector<ShearProfile> profiles, const CriticalPointOptions& opts = {});

  const std::vector<ShearProfile>& profiles() const { return profiles_; }
  std::size_t size() const { return profiles_.size(); }
  const ShearProfile& operator[](std::size_t j) const { return profiles_[j]; }
  /// Per-profile critical points (empty for constant profiles).
  const std::vector<std::vector<CriticalPoint>>& critical() const { return critical_; }
  int max_degree() const;
  /// Every profile minus its value at y0.
  ProfileFamily recentered(double y0) const;

 private:
  std::vector<ShearProfile> profiles_;
  std::vector<std::vector<CriticalPoint>> critical_;
};

OverlapResult overlap_order(const ProfileFamily& family, double tol_match = 1e-6);

/// sin^3 y = (3 sin y - sin 3y) / 4.
ShearProfile sin_cubed();

}  // namespace dlab
