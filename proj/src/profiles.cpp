#include "dlab/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dlab/error.hpp"

namespace dlab {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double periodic_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

double wrap(double y) {
  y = std::fmod(y, kTwoPi);
  if (y < 0) y += kTwoPi;
  if (kTwoPi - y < 1e-13) y = 0.0;
  return y;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

int sample_count(const ShearProfile& u) { return std::max(512, 128 * std::max(1, u.degree())); }

// Scales max_y |u^(k)| for k = 0..kmax.
std::vector<double> derivative_scales(const ShearProfile& u, int kmax) {
  std::vector<double> s(kmax + 1);
  for (int k = 0; k <= kmax; ++k) s[k] = u.derivative(k).max_abs();
  return s;
}

}  // namespace

ShearProfile::ShearProfile(std::vector<double> a, std::vector<double> b) {
  const std::size_t k = std::max(a.size(), b.size() + 1);
  a_.assign(k, 0.0);
  b_.assign(k, 0.0);
  std::copy(a.begin(), a.end(), a_.begin());
  std::copy(b.begin(), b.end(), b_.begin() + 1);
  for (std::size_t i = 0; i < k; ++i)
    if (!std::isfinite(a_[i]) || !std::isfinite(b_[i]))
      throw ConfigError("profiles", "ShearProfile", "coefficients must be finite");
  while (a_.size() > 1 && a_.back() == 0.0 && b_.back() == 0.0) {
    a_.pop_back();
    b_.pop_back();
  }
}

ShearProfile ShearProfile::sine(int k, double amplitude) {
  std::vector<double> b(k, 0.0);
  b[k - 1] = amplitude;
  return ShearProfile({}, b);
}

ShearProfile ShearProfile::cosine(int k, double amplitude) {
  std::vector<double> a(k + 1, 0.0);
  a[k] = amplitude;
  return ShearProfile(a, {});
}

ShearProfile ShearProfile::constant(double value) { return ShearProfile({value}, {}); }

double ShearProfile::a(int k) const { return k >= 0 && k < static_cast<int>(a_.size()) ? a_[k] : 0.0; }

double ShearProfile::b(int k) const { return k >= 1 && k < static_cast<int>(b_.size()) ? b_[k] : 0.0; }

bool ShearProfile::is_constant() const {
  for (std::size_t k = 1; k < a_.size(); ++k)
    if (a_[k] != 0.0 || b_[k] != 0.0) return false;
  return true;
}

double ShearProfile::operator()(double y) const { return derivative_at(0, y); }

double ShearProfile::derivative_at(int order, double y) const {
  // d^m/dy^m [a cos ky + b sin ky] = k^m [a cos(ky + m pi/2) + b sin(ky + m pi/2)]
  const int r = order % 4;
  double s = order == 0 ? a_[0] : 0.0;
  for (std::size_t k = 1; k < a_.size(); ++k) {
    const double kk = static_cast<double>(k);
    const double c = std::cos(kk * y), sn = std::sin(kk * y);
    double ca = 0, cb = 0;  // derivative of cos and of sin, without k^m
    switch (r) {
      case 0: ca = c; cb = sn; break;
      case 1: ca = -sn; cb = c; break;
      case 2: ca = -c; cb = -sn; break;
      default: ca = sn; cb = -c; break;
    }
    s += std::pow(kk, order) * (a_[k] * ca + b_[k] * cb);
  }
  return s;
}

ShearProfile ShearProfile::derivative(int order) const {
  ShearProfile d = *this;
  for (int m = 0; m < order; ++m) {
    d.a_[0] = 0.0;
    for (std::size_t k = 1; k < d.a_.size(); ++k) {
      const double kk = static_cast<double>(k);
      const double a = d.a_[k], b = d.b_[k];
      d.a_[k] = kk * b;
      d.b_[k] = -kk * a;
    }
  }
  return d;
}

ShearProfile ShearProfile::shifted(double offset) const {
  ShearProfile s = *this;
  s.a_[0] -= offset;
  return s;
}

double ShearProfile::max_abs() const {
  const int m = sample_count(*this);
  double best = 0.0;
  for (int i = 0; i < m; ++i) best = std::max(best, std::abs((*this)(kTwoPi * i / m)));
  return best;
}

int local_order(const ShearProfile& u, double y, double tol) {
  if (u.is_constant()) return kInfiniteOrder;
  const int kmax = 2 * u.degree() + 1;
  for (int k = 1; k <= kmax; ++k) {
    const ShearProfile d = u.derivative(k);
    if (std::abs(d(y)) > tol * d.max_abs()) return k - 1;
  }
  throw InvariantError("profiles", "local_order", "no nonvanishing derivative up to order 2K+1");
}

std::vector<CriticalPoint> critical_points(const ShearProfile& u, const CriticalPointOptions& opts) {
  if (u.is_constant()) throw ConfigError("profiles", "critical_points", "profile is constant");
  const int kdeg = u.degree();
  const int jmax = 2 * kdeg;
  const std::vector<double> scale = derivative_scales(u, jmax + 1);
  const int m = sample_count(u);
  const double h = kTwoPi / m;

  struct Candidate {
    double y;
    int j;
  };
  std::vector<Candidate> cands;

  auto lower_vanish = [&](double y, int j) {
    for (int k = 1; k < j; ++k) {
      const double tol = k == 1 ? opts.tol_root : opts.tol_order;
      if (std::abs(u.derivative_at(k, y)) > tol * scale[k]) return false;
    }
    return true;
  };

  for (int j = 1; j <= jmax; ++j) {
    if (scale[j] == 0.0) continue;
    std::vector<double> f(m + 1);
    for (int i = 0; i <= m; ++i) f[i] = u.derivative_at(j, i * h);
    for (int i = 0; i < m; ++i) {
      double root = 0.0;
      if (f[i] == 0.0) {
        root = i * h;
      } else if (f[i] * f[i + 1] < 0.0) {
        // Safeguarded Newton on the bracket [lo, hi].
        double lo = i * h, hi = (i + 1) * h, flo = f[i];
        double x = 0.5 * (lo + hi);
        bool done = false;
        for (int it = 0; it < 200 && !done; ++it) {
          const double fx = u.derivative_at(j, x);
          if (fx == 0.0) break;
          if ((fx < 0) == (flo < 0)) {
            lo = x;
            flo = fx;
          } else {
            hi = x;
          }
          const double dfx = u.derivative_at(j + 1, x);
          double next = dfx != 0.0 ? x - fx / dfx : 0.5 * (lo + hi);
          if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
          done = std::abs(next - x) <= 1e-15 * (1.0 + std::abs(x)) || hi - lo <= 4e-16 * kTwoPi;
          x = next;
        }
        if (!done && hi - lo > 1e-12) {
          std::ostringstream os;
          os << "Newton refinement did not converge in [" << lo << ", " << hi << "]";
          throw ConvergenceError("profiles", "critical_points", os.str());
        }
        root = x;
      } else {
        continue;
      }
      root = wrap(root);
      if (lower_vanish(root, j)) cands.push_back({root, j});
    }
  }

  // Cluster; the highest-j member is the most accurate location of a
  // multiple root.
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.y < b.y; });
  std::vector<std::vector<Candidate>> clusters;
  for (const auto& c : cands) {
    bool placed = false;
    for (auto& cl : clusters) {
      if (periodic_distance(cl.front().y, c.y) <= opts.merge_radius) {
        cl.push_back(c);
        placed = true;
        break;
      }
    }
    if (!placed) clusters.push_back({c});
  }

  std::vector<CriticalPoint> out;
  for (const auto& cl : clusters) {
    const Candidate best = *std::max_element(cl.begin(), cl.end(),
                                             [](const Candidate& a, const Candidate& b) { return a.j < b.j; });
    int order = 0;
    for (int k = 1; k <= jmax + 1; ++k) {
      const double tol = k == 1 ? opts.tol_root : opts.tol_order;
      if (std::abs(u.derivative_at(k, best.y)) > tol * scale[k]) {
        order = k - 1;
        break;
      }
      if (k == jmax + 1) {
        throw InvariantError("profiles", "critical_points",
                             "vanishing order exceeds 2K at y = " + std::to_string(best.y));
      }
    }
    if (order == 0) continue;
    out.push_back({best.y, order, u.derivative_at(order + 1, best.y) / factorial(order + 1)});
  }
  std::sort(out.begin(), out.end(), [](const CriticalPoint& a, const CriticalPoint& b) { return a.y < b.y; });
  return out;
}

ProfileFamily::ProfileFamily(std::vector<ShearProfile> profiles, const CriticalPointOptions& opts)
    : profiles_(std::move(profiles)) {
  if (profiles_.empty()) throw ConfigError("profiles", "ProfileFamily", "family is empty");
  critical_.reserve(profiles_.size());
  for (const auto& u : profiles_)
    critical_.push_back(u.is_constant() ? std::vector<CriticalPoint>{} : critical_points(u, opts));
}

int ProfileFamily::max_degree() const {
  int d = 0;
  for (const auto& u : profiles_) d = std::max(d, u.degree());
  return d;
}

ProfileFamily ProfileFamily::recentered(double y0) const {
  std::vector<ShearProfile> out;
  out.reserve(profiles_.size());
  for (const auto& u : profiles_) out.push_back(u.shifted(u(y0)));
  return ProfileFamily(std::move(out));
}

OverlapResult overlap_order(const ProfileFamily& family, double tol_match) {
  if (family.size() == 0) throw ConfigError("profiles", "overlap_order", "family is empty");
  OverlapResult res;
  std::vector<double> locations;
  for (std::size_t j = 0; j < family.size(); ++j) {
    if (family[j].is_constant()) {
      res.degenerate.push_back(j);
      continue;
    }
    for (const auto& c : family.critical()[j]) locations.push_back(c.y);
  }
  if (res.degenerate.size() == family.size())
    throw ConfigError("profiles", "overlap_order", "every profile is constant; n0 is infinite");

  std::sort(locations.begin(), locations.end());
  std::vector<double> reps;
  for (double y : locations) {
    bool seen = false;
    for (double r : reps)
      if (periodic_distance(r, y) <= tol_match) seen = true;
    if (!seen) reps.push_back(y);
  }

  res.n0 = 0;
  for (double y : reps) {
    int order = kInfiniteOrder;
    for (std::size_t j = 0; j < family.size(); ++j) {
      if (family[j].is_constant()) continue;
      int oj = 0;
      bool matched = false;
      for (const auto& c : family.critical()[j]) {
        if (periodic_distance(c.y, y) <= tol_match) {
          oj = c.order;
          matched = true;
        }
      }
      if (!matched) oj = local_order(family[j], y);
      order = std::min(order, oj);
    }
    res.candidates.push_back({y, order});
    res.n0 = std::max(res.n0, order);
  }
  for (const auto& c : res.candidates)
    if (c.order == res.n0 && res.n0 > 0) res.maximizers.push_back(c.y);
  return res;
}

ShearProfile sin_cubed() { return ShearProfile({}, {0.75, 0.0, -0.25}); }

}  // namespace dlab
