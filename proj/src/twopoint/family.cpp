#include <cmath>
#include <sstream>

#include "dlab/error.hpp"
#include "dlab/twopoint.hpp"

namespace dlab {
namespace {

double frob(const SparseCplx& a) { return a.norm(); }

// Fourier coefficient of e^{ipy} in u.
cplx profile_coeff(const ShearProfile& u, int p) {
  if (p == 0) return u.a(0);
  const int k = std::abs(p);
  return p > 0 ? cplx(u.a(k), -u.b(k)) / 2.0 : cplx(u.a(k), u.b(k)) / 2.0;
}

// Replaces A by (A - A^H)/2 and returns the Frobenius size of the change.
double antisymmetrize(SparseCplx& a) {
  SparseCplx skew = (a - SparseCplx(a.adjoint())) * cplx(0.5);
  const double corr = (a - skew).norm();
  skew.prune(cplx(0.0), 0.0);
  a = std::move(skew);
  return corr;
}

}  // namespace

GeneratorFamily::GeneratorFamily(const std::vector<Eigen::MatrixXcd>& a, double tol) {
  for (const auto& m : a) a_.push_back(m.sparseView(0.0, 0.0));
  validate(tol);
}

GeneratorFamily::GeneratorFamily(std::vector<SparseCplx> a, std::optional<FourierProvenance> provenance, double tol)
    : a_(std::move(a)), provenance_(std::move(provenance)) {
  validate(tol);
}

GeneratorFamily GeneratorFamily::from_hermitian(const std::vector<Eigen::MatrixXcd>& l) {
  std::vector<Eigen::MatrixXcd> a;
  for (const auto& m : l) a.push_back(cplx(0, 1) * m);
  return GeneratorFamily(a);
}

void GeneratorFamily::validate(double tol) {
  if (a_.empty()) throw ConfigError("twopoint", "GeneratorFamily", "family is empty");
  dim_ = static_cast<int>(a_[0].rows());
  if (dim_ < 1) throw ConfigError("twopoint", "GeneratorFamily", "matrices must be at least 1 x 1");
  real_ = true;
  scale_ = 0.0;
  for (std::size_t k = 0; k < a_.size(); ++k) {
    auto& m = a_[k];
    if (m.rows() != dim_ || m.cols() != dim_)
      throw ConfigError("twopoint", "GeneratorFamily", "generator " + std::to_string(k) + " has inconsistent size");
    m.makeCompressed();
    const double nrm = frob(m);
    const double defect = (m + SparseCplx(m.adjoint())).norm();
    if (defect > tol * nrm) {
      std::ostringstream os;
      os << "generator " << k << " is not anti-Hermitian: ||A + A^H|| = " << defect << " vs ||A|| = " << nrm;
      throw ConfigError("twopoint", "GeneratorFamily", os.str());
    }
    for (Eigen::Index j = 0; j < m.nonZeros(); ++j)
      if (m.valuePtr()[j].imag() != 0.0) real_ = false;
    scale_ = std::max(scale_, nrm);
  }
  if (provenance_ && provenance_->modes.size() != static_cast<std::size_t>(dim_))
    throw ConfigError("twopoint", "GeneratorFamily", "provenance mode list does not match the dimension");
}

Eigen::VectorXd hermitian_coordinates(const Eigen::MatrixXcd& m) {
  const int d = static_cast<int>(m.rows());
  Eigen::VectorXd x(static_cast<Eigen::Index>(d) * d);
  int idx = 0;
  for (int a = 0; a < d; ++a) x[idx++] = m(a, a).real();
  const double r2 = std::sqrt(2.0);
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      const cplx v = 0.5 * (m(a, b) + std::conj(m(b, a)));
      x[idx++] = r2 * v.real();
      x[idx++] = r2 * v.imag();
    }
  return x;
}

Eigen::MatrixXcd hermitian_from_coordinates(int d, const double* x) {
  Eigen::MatrixXcd m(d, d);
  int idx = 0;
  for (int a = 0; a < d; ++a) m(a, a) = x[idx++];
  const double s = 1.0 / std::sqrt(2.0);
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      const cplx v(x[idx] * s, x[idx + 1] * s);
      idx += 2;
      m(a, b) = v;
      m(b, a) = std::conj(v);
    }
  return m;
}

GeneratorFamily galerkin_shear(const ProfileFamily& family, int ell, int cutoff) {
  if (family.size() == 0) throw ConfigError("twopoint", "galerkin_shear", "profile family is empty");
  if (cutoff < 2 * family.max_degree())
    throw ConfigError("twopoint", "galerkin_shear", "cutoff K must be at least twice the profile degree");
  const int d = 2 * cutoff + 1;
  FourierProvenance prov;
  prov.kind = "shear";
  prov.cutoff = cutoff;
  prov.reach = family.max_degree();
  for (int n = -cutoff; n <= cutoff; ++n) prov.modes.push_back({ell, n});
  std::vector<SparseCplx> mats;
  for (const auto& u : family.profiles()) {
    std::vector<Eigen::Triplet<cplx>> trip;
    const int deg = u.degree();
    for (int n = -cutoff; n <= cutoff; ++n)
      for (int p = -deg; p <= deg; ++p) {
        const int m = n + p;
        if (m < -cutoff || m > cutoff) continue;
        const cplx c = cplx(0, ell) * profile_coeff(u, p);
        if (c != cplx(0)) trip.emplace_back(m + cutoff, n + cutoff, c);
      }
    SparseCplx a(d, d);
    a.setFromTriplets(trip.begin(), trip.end());
    prov.symmetrization_correction += antisymmetrize(a);
    mats.push_back(std::move(a));
  }
  return GeneratorFamily(std::move(mats), prov);
}

TrigField2D TrigField2D::shear_x(const ShearProfile& u) {
  TrigField2D f;
  for (int q = -u.degree(); q <= u.degree(); ++q) {
    const cplx c = profile_coeff(u, q);
    if (c != cplx(0)) f.coeffs[{0, q}] = {c, 0.0};
  }
  return f;
}

TrigField2D TrigField2D::shear_y(const ShearProfile& u) {
  TrigField2D f;
  for (int p = -u.degree(); p <= u.degree(); ++p) {
    const cplx c = profile_coeff(u, p);
    if (c != cplx(0)) f.coeffs[{p, 0}] = {0.0, c};
  }
  return f;
}

int TrigField2D::degree() const {
  int deg = 0;
  for (const auto& [pq, c] : coeffs) deg = std::max({deg, std::abs(pq.first), std::abs(pq.second)});
  return deg;
}

double TrigField2D::divergence_defect() const {
  double r = 0;
  for (const auto& [pq, c] : coeffs) r = std::max(r, std::abs(double(pq.first) * c[0] + double(pq.second) * c[1]));
  return r;
}

GeneratorFamily galerkin_2d(const std::vector<TrigField2D>& fields, int cutoff, bool mean_free) {
  if (fields.empty()) throw ConfigError("twopoint", "galerkin_2d", "no vector fields given");
  if (cutoff < 1) throw ConfigError("twopoint", "galerkin_2d", "cutoff K must be >= 1");
  FourierProvenance prov;
  prov.kind = "2d";
  prov.cutoff = cutoff;
  prov.mean_free = mean_free;
  const int w = 2 * cutoff + 1;
  std::vector<int> index(static_cast<std::size_t>(w) * w, -1);
  for (int m = -cutoff; m <= cutoff; ++m)
    for (int n = -cutoff; n <= cutoff; ++n) {
      if (mean_free && m == 0 && n == 0) continue;
      index[static_cast<std::size_t>(m + cutoff) * w + (n + cutoff)] = static_cast<int>(prov.modes.size());
      prov.modes.push_back({m, n});
    }
  const int d = static_cast<int>(prov.modes.size());
  auto lookup = [&](int m, int n) {
    if (std::abs(m) > cutoff || std::abs(n) > cutoff) return -1;
    return index[static_cast<std::size_t>(m + cutoff) * w + (n + cutoff)];
  };
  std::vector<SparseCplx> mats;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const auto& f = fields[k];
    double cmax = 0;
    for (const auto& [pq, c] : f.coeffs) cmax = std::max({cmax, std::abs(c[0]), std::abs(c[1])});
    if (f.divergence_defect() > 1e-12 * std::max(cmax, 1.0))
      throw ConfigError("twopoint", "galerkin_2d", "field " + std::to_string(k) + " is not divergence free");
    prov.reach = std::max(prov.reach, f.degree());
    std::vector<Eigen::Triplet<cplx>> trip;
    for (int src = 0; src < d; ++src) {
      const auto [m, n] = prov.modes[src];
      for (const auto& [pq, c] : f.coeffs) {
        const int dst = lookup(m + pq.first, n + pq.second);
        if (dst < 0) continue;
        const cplx v = cplx(0, 1) * (c[0] * double(m) + c[1] * double(n));
        if (v != cplx(0)) trip.emplace_back(dst, src, v);
      }
    }
    SparseCplx a(d, d);
    a.setFromTriplets(trip.begin(), trip.end());
    prov.symmetrization_correction += antisymmetrize(a);
    mats.push_back(std::move(a));
  }
  return GeneratorFamily(std::move(mats), prov);
}

double fourier_h1(const FourierProvenance& prov, const Eigen::VectorXcd& c) {
  double s = 0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const auto [m, n] = prov.modes[i];
    s += double(m * m + n * n) * std::norm(c[i]);
  }
  return std::sqrt(s);
}

bool shear_enhancing(const ProfileFamily& family) {
  for (const auto& u : family.profiles())
    if (!u.is_constant()) return true;
  return false;
}

}  // namespace dlab
