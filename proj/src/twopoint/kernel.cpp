#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <type_traits>

#include "dlab/error.hpp"
#include "dlab/linalg.hpp"
#include "dlab/twopoint.hpp"

namespace dlab {

struct KernelAccess {
  static KernelFactors& factors(KernelBasis& b) { return b.f_; }
  static void label(KernelBasis& b, std::string route, double tol) {
    b.route_ = std::move(route);
    b.tol_null_ = tol;
  }
};

namespace {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Sp = Eigen::SparseMatrix<S, Eigen::ColMajor>;

const std::vector<Eigen::MatrixXcd>& herm_basis(int m) {
  thread_local std::map<int, std::vector<Eigen::MatrixXcd>> cache;
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  std::vector<Eigen::MatrixXcd> out;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m) * m);
  for (Eigen::Index j = 0; j < e.size(); ++j) {
    e[j] = 1.0;
    out.push_back(hermitian_from_coordinates(m, e.data()));
    e[j] = 0.0;
  }
  return cache.emplace(m, std::move(out)).first->second;
}

struct NullSpace {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;  // the kept ones
  double gap = std::numeric_limits<double>::infinity();
};

double power_max(const Eigen::MatrixXd& a) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(a.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += 1e-3 * std::sin(1.0 + i);
  v.normalize();
  double lam = 0;
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXd w = a * v;
    const double next = v.dot(w);
    const double nw = w.norm();
    if (nw == 0) return 0.0;
    v = w / nw;
    if (it > 10 && std::abs(next - lam) <= 1e-6 * std::abs(next)) return next;
    lam = next;
  }
  return lam;
}

// Kernel of a symmetric positive semidefinite matrix with the relative
// threshold and gap rule.
NullSpace psd_null(const Eigen::MatrixXd& n, double tol, double min_gap, const char* op) {
  NullSpace out;
  const Eigen::Index p = n.rows();
  if (p == 0) {
    out.vectors.resize(0, 0);
    return out;
  }
  linalg::Eigh<double> e;
  double lmax;
  if (p <= 2000) {
    e = linalg::eigh(n);
    lmax = e.values[p - 1];
  } else {
    lmax = power_max(n);
  }
  if (!(lmax > 0)) {
    out.vectors = Eigen::MatrixXd::Identity(p, p);
    out.values = Eigen::VectorXd::Zero(p);
    return out;
  }
  const double thr = tol * lmax;
  if (p > 2000) e = linalg::eigh_below(n, 100.0 * thr);
  Eigen::Index r = 0;
  while (r < e.values.size() && e.values[r] <= thr) ++r;
  if (r < e.values.size()) {
    const double first = e.values[r];
    out.gap = r > 0 ? first / std::max(std::abs(e.values[r - 1]), 1e-300 * lmax) : first / thr;
  } else if (p > 2000) {
    // Nothing inside the searched window above thr: the gap is at least the window.
    out.gap = 100.0 * thr / std::max(r > 0 ? std::abs(e.values[r - 1]) : thr, 1e-300 * lmax);
  }
  if (out.gap < min_gap) {
    std::ostringstream os;
    os << "rank decision is ambiguous: eigenvalue gap " << out.gap << " < " << min_gap
       << " around the threshold " << thr << "; override tol_null";
    throw ConvergenceError("twopoint", op, os.str());
  }
  out.vectors = e.vectors.leftCols(r);
  out.values = e.values.head(r);
  return out;
}

double gram_defect(const Eigen::MatrixXd& c) {
  if (c.cols() == 0) return 0.0;
  return (c.transpose() * c - Eigen::MatrixXd::Identity(c.cols(), c.cols())).cwiseAbs().maxCoeff();
}

KernelBasis dense_route(const GeneratorFamily& fam, const KernelOptions& o) {
  const int d = fam.dim();
  const Eigen::MatrixXd n = -2.0 * build_superoperator(fam);
  const NullSpace ns = psd_null(n, o.tol_null, o.min_gap, "kernel_basis");
  KernelBasis b;
  KernelFactors& f = KernelAccess::factors(b);
  KernelAccess::label(b, "dense", o.tol_null);
  f.real_q = true;
  f.q_real = Eigen::MatrixXd::Identity(d, d);
  f.offset = {0};
  f.size = {d};
  f.param_group = {0};
  f.param_offset = {0};
  f.coupled = ns.vectors;
  b.gap_ratio = ns.gap;
  b.gram_defect = gram_defect(f.coupled);
  for (Eigen::Index i = 0; i < f.coupled.cols(); ++i) {
    const Eigen::MatrixXcd m = hermitian_from_coordinates(d, f.coupled.col(i).data());
    for (std::size_t k = 0; k < fam.size(); ++k) {
      const Eigen::MatrixXcd a = fam.dense(k);
      b.commutator_residual = std::max(b.commutator_residual, (a * m - m * a).norm());
    }
  }
  if (o.verify) {
    const Eigen::MatrixXd oracle = commutant_oracle(fam, std::sqrt(o.tol_null));
    b.oracle_dim = oracle.cols();
    if (oracle.cols() != f.coupled.cols()) {
      b.oracle_max_sine = 1.0;
    } else {
      const Eigen::VectorXd s = linalg::principal_angle_sines(f.coupled, oracle);
      b.oracle_max_sine = s.size() ? s[0] : 0.0;
    }
    if (*b.oracle_dim != f.coupled.cols() || *b.oracle_max_sine > 1e-6) {
      std::ostringstream os;
      os << "superoperator kernel (dim " << f.coupled.cols() << ") disagrees with the commutant solve (dim "
         << *b.oracle_dim << ", max angle sine " << *b.oracle_max_sine << ")";
      throw InvariantError("twopoint", "kernel_basis", os.str());
    }
  }
  return b;
}

template <class S>
Sp<S> convert(const SparseCplx& a) {
  if constexpr (std::is_same_v<S, double>) {
    return Sp<double>(a.real());
  } else {
    return a;
  }
}

// A random Hermitian element of the algebra generated by the family, from
// words of length <= 3 (<= 2 for more than four generators).
template <class S>
Mat<S> generic_element(const GeneratorFamily& fam, std::uint64_t seed) {
  const int d = fam.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<Sp<S>> gen;
  for (std::size_t k = 0; k < fam.size(); ++k) {
    const double nrm = fam[k].norm();
    if (nrm > 0) gen.push_back(convert<S>(fam[k]) * S(std::sqrt(double(d)) / nrm));
  }
  Mat<S> y = Mat<S>::Zero(d, d);
  if (gen.empty()) return y;
  const int maxlen = gen.size() <= 4 ? 3 : 2;
  std::vector<Sp<S>> words = gen;
  for (int len = 1; len <= maxlen; ++len) {
    for (const auto& w : words) {
      const Sp<S> wh = w.adjoint();
      const Sp<S> sym = (w + wh) * S(0.5 * uni(rng));
      y += Mat<S>(sym);
      if constexpr (!std::is_same_v<S, double>) {
        const Sp<S> skew = (w - wh) * S(cplx(0.0, 0.5 * uni(rng)));
        y += Mat<S>(skew);
      }
    }
    if (len == maxlen) break;
    std::vector<Sp<S>> next;
    for (const auto& w : words)
      for (const auto& g : gen) next.push_back(Sp<S>(w * g));
    words = std::move(next);
  }
  return Mat<S>(0.5 * (y + y.adjoint()));
}

template <class S>
KernelBasis finish(const GeneratorFamily& fam, const KernelOptions& o, const Mat<S>& q, const std::vector<int>& offset,
                   const std::vector<Mat<S>>& at) {
  const int d = fam.dim();
  KernelBasis b;
  KernelFactors& f = KernelAccess::factors(b);
  KernelAccess::label(b, "reduced", o.tol_null);
  f.offset = offset;
  for (std::size_t g = 0; g < offset.size(); ++g)
    f.size.push_back((g + 1 < offset.size() ? offset[g + 1] : d) - offset[g]);
  const int ngroups = static_cast<int>(offset.size());
  std::vector<double> scale;
  for (std::size_t k = 0; k < fam.size(); ++k) scale.push_back(fam[k].norm());

  // Free groups: no generator leaves them and each acts as a scalar on them.
  double free_defect = 0;
  std::vector<int> pidx(ngroups, -1);
  int p = 0;
  for (int g = 0; g < ngroups; ++g) {
    const int off = f.offset[g], m = f.size[g];
    bool free = true;
    double defect2 = 0;
    for (std::size_t k = 0; k < at.size() && free; ++k) {
      const double total = at[k].middleCols(off, m).squaredNorm();
      const Mat<S> blk = at[k].block(off, off, m, m);
      const double out2 = std::max(0.0, total - blk.squaredNorm());
      const S alpha = blk.trace() / double(m);
      const double dev2 = (blk - alpha * Mat<S>::Identity(m, m)).squaredNorm();
      const double lim = 1e-10 * scale[k];
      if (out2 > lim * lim || dev2 > lim * lim) free = false;
      defect2 += out2 + dev2;
    }
    if (free) {
      f.free_group.push_back(g);
      f.free_span.push_back(Eigen::MatrixXcd::Identity(m, m));
      free_defect = std::max(free_defect, 2.0 * std::sqrt(defect2));
    } else {
      pidx[g] = p;
      f.param_group.push_back(g);
      f.param_offset.push_back(p);
      p += m * m;
    }
  }

  // N = sum_k ad_k^H ad_k on block-diagonal Hermitian X in the rotated frame.
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t k = 0; k < at.size(); ++k) {
    const double skip = 1e-14 * scale[k];
    for (int h : f.param_group) {
      const int oh = f.offset[h], mh = f.size[h], ph = pidx[h];
      for (int g : f.param_group) {
        const int og = f.offset[g], mg = f.size[g], pg = pidx[g];
        if (mg == 1 && mh == 1) {
          if (g == h) continue;
          const double w = std::norm(at[k](og, oh));
          n(pg, pg) += w;
          n(ph, ph) += w;
          n(pg, ph) -= w;
          n(ph, pg) -= w;
          continue;
        }
        const Eigen::MatrixXcd t = at[k].block(og, oh, mg, mh).template cast<cplx>();
        if (t.norm() <= skip) continue;
        const auto& eh = herm_basis(mh);
        const auto& eg = herm_basis(mg);
        const int nh = mh * mh, ng = g == h ? 0 : mg * mg;
        Eigen::MatrixXd jac(2 * mg * mh, nh + ng);
        auto put = [&](int col, const Eigen::MatrixXcd& z) {
          for (int c = 0; c < mh; ++c)
            for (int r = 0; r < mg; ++r) {
              jac(2 * (c * mg + r), col) = z(r, c).real();
              jac(2 * (c * mg + r) + 1, col) = z(r, c).imag();
            }
        };
        for (int beta = 0; beta < nh; ++beta) {
          Eigen::MatrixXcd z = t * eh[beta];
          if (g == h) z -= eh[beta] * t;
          put(beta, z);
        }
        for (int alpha = 0; alpha < ng; ++alpha) put(nh + alpha, -eg[alpha] * t);
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        std::vector<int> idx;
        for (int i = 0; i < nh; ++i) idx.push_back(ph + i);
        for (int i = 0; i < ng; ++i) idx.push_back(pg + i);
        for (std::size_t a = 0; a < idx.size(); ++a)
          for (std::size_t c = 0; c < idx.size(); ++c) n(idx[a], idx[c]) += jtj(a, c);
      }
    }
  }

  const NullSpace ns = psd_null(n, o.tol_null, o.min_gap, "kernel_basis");
  f.coupled = p > 0 ? ns.vectors : Eigen::MatrixXd(0, 0);
  b.gap_ratio = ns.gap;
  b.gram_defect = gram_defect(f.coupled);
  // X^T N X is the squared commutator norm summed over generators.
  double res = free_defect;
  for (Eigen::Index i = 0; i < ns.values.size(); ++i) res = std::max(res, std::sqrt(std::max(ns.values[i], 0.0)));
  b.commutator_residual = res;
  if constexpr (std::is_same_v<S, double>) {
    f.real_q = true;
    f.q_real = q;
  } else {
    f.real_q = false;
    f.q_cplx = q;
  }
  return b;
}

template <class S>
KernelBasis reduced_route(const GeneratorFamily& fam, const KernelOptions& o) {
  const int d = fam.dim();
  auto eig = linalg::eigh(generic_element<S>(fam, o.seed));
  const Eigen::VectorXd& ev = eig.values;
  const double spread = ev[d - 1] - ev[0];
  std::vector<int> offset{0};
  for (int i = 1; i < d; ++i)
    if (ev[i] - ev[i - 1] > 1e-6 * spread) offset.push_back(i);
  const int ngroups = static_cast<int>(offset.size());
  auto group_size = [&](const std::vector<int>& off, std::size_t g) {
    return (g + 1 < off.size() ? off[g + 1] : d) - off[g];
  };

  const Mat<S>& q = eig.vectors;
  std::vector<Mat<S>> at;
  for (std::size_t k = 0; k < fam.size(); ++k) {
    const Mat<S> aq = convert<S>(fam[k]) * q;
    at.push_back(q.adjoint() * aq);
  }

  // A kernel element X is block diagonal here, so each diagonal block commutes
  // with the compression of every generator. Split groups by the eigenspaces
  // of a random combination of those compressions (complex even for real
  // generators, which separates conjugate pairs).
  std::mt19937_64 rng(o.seed ^ 0x7265666eULL);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> coef;
  double csum = 0;
  for (std::size_t k = 0; k < fam.size(); ++k) {
    const double nrm = fam[k].norm();
    const double u = uni(rng);
    coef.push_back(nrm > 0 ? u / nrm : 0.0);
    csum += std::abs(u);
  }
  std::vector<Eigen::MatrixXcd> vblk(ngroups);
  std::vector<Eigen::VectorXd> zval(ngroups);
  double zscale = 0;
  for (int g = 0; g < ngroups; ++g) {
    const int off = offset[g], m = group_size(offset, g);
    if (m == 1) continue;
    Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(m, m);
    for (std::size_t k = 0; k < at.size(); ++k)
      z += cplx(0, coef[k]) * at[k].block(off, off, m, m).template cast<cplx>();
    auto ze = linalg::eigh(Eigen::MatrixXcd(0.5 * (z + z.adjoint())));
    zscale = std::max(zscale, ze.values.cwiseAbs().maxCoeff());
    vblk[g] = std::move(ze.vectors);
    zval[g] = std::move(ze.values);
  }
  // Compressions that vanish up to roundoff must not split anything.
  const double zsplit = std::max(1e-6 * zscale, 1e-10 * csum);
  std::vector<int> refined;
  for (int g = 0; g < ngroups; ++g) {
    refined.push_back(offset[g]);
    const int m = group_size(offset, g);
    for (int i = 1; i < m; ++i)
      if (zval[g][i] - zval[g][i - 1] > zsplit) refined.push_back(offset[g] + i);
  }
  if (refined.size() == offset.size()) return finish<S>(fam, o, q, offset, at);

  Eigen::MatrixXcd qc = q.template cast<cplx>();
  std::vector<Eigen::MatrixXcd> atc;
  for (const auto& a : at) atc.push_back(a.template cast<cplx>());
  for (int g = 0; g < ngroups; ++g) {
    if (vblk[g].size() == 0) continue;
    const int off = offset[g], m = group_size(offset, g);
    qc.middleCols(off, m) = (qc.middleCols(off, m) * vblk[g]).eval();
    for (auto& a : atc) {
      a.middleCols(off, m) = (a.middleCols(off, m) * vblk[g]).eval();
      a.middleRows(off, m) = (vblk[g].adjoint() * a.middleRows(off, m)).eval();
    }
  }
  return finish<cplx>(fam, o, qc, refined, atc);
}

}  // namespace

Eigen::MatrixXcd KernelFactors::q_block(int g) const {
  if (real_q) return q_real.middleCols(offset[g], size[g]).cast<cplx>();
  return q_cplx.middleCols(offset[g], size[g]);
}

Eigen::MatrixXcd KernelFactors::coupled_block(Eigen::Index e, std::size_t i) const {
  return hermitian_from_coordinates(size[param_group[i]], coupled.col(e).data() + param_offset[i]);
}

long KernelBasis::rank() const {
  long r = f_.coupled.cols();
  for (const auto& w : f_.free_span) r += static_cast<long>(w.cols()) * w.cols();
  return r;
}

Eigen::MatrixXcd KernelBasis::matrix(long i) const {
  if (i < 0 || i >= rank()) throw ConfigError("twopoint", "KernelBasis::matrix", "index out of range");
  const int d = dim();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  if (i < f_.coupled.cols()) {
    for (std::size_t pg = 0; pg < f_.param_group.size(); ++pg) {
      const Eigen::MatrixXcd x = f_.coupled_block(i, pg);
      if (x.norm() == 0) continue;
      const Eigen::MatrixXcd qg = f_.q_block(f_.param_group[pg]);
      m += qg * x * qg.adjoint();
    }
    return m;
  }
  long local = i - f_.coupled.cols();
  for (std::size_t j = 0; j < f_.free_group.size(); ++j) {
    const long w = f_.free_span[j].cols();
    if (local >= w * w) {
      local -= w * w;
      continue;
    }
    Eigen::VectorXd e = Eigen::VectorXd::Zero(w * w);
    e[local] = 1.0;
    const Eigen::MatrixXcd qw = f_.q_block(f_.free_group[j]) * f_.free_span[j];
    return qw * hermitian_from_coordinates(static_cast<int>(w), e.data()) * qw.adjoint();
  }
  return m;
}

KernelBasis kernel_basis(const GeneratorFamily& family, const KernelOptions& opts) {
  if (family.size() == 0) throw ConfigError("twopoint", "kernel_basis", "family is empty");
  if (family.dim() <= opts.dense_max_dim) return dense_route(family, opts);
  if (family.is_real() && opts.prefer_real) return reduced_route<double>(family, opts);
  return reduced_route<cplx>(family, opts);
}

KernelBasis resolved_kernel(const KernelBasis& basis, const GeneratorFamily& family, const GeneratorFamily& wider,
                            const std::vector<int>& embed, double tol) {
  const int d = family.dim();
  if (static_cast<int>(embed.size()) != d || basis.dim() != d)
    throw ConfigError("twopoint", "resolved_kernel", "embedding size differs from the family dimension");
  if (wider.size() != family.size())
    throw ConfigError("twopoint", "resolved_kernel", "wider family has a different number of generators");
  std::vector<int> inband(wider.dim(), -1), outband(wider.dim(), -1);
  for (int i = 0; i < d; ++i) {
    if (embed[i] < 0 || embed[i] >= wider.dim() || inband[embed[i]] >= 0)
      throw ConfigError("twopoint", "resolved_kernel", "embedding is not injective into the wider basis");
    inband[embed[i]] = i;
  }
  int nout = 0;
  for (int r = 0; r < wider.dim(); ++r)
    if (inband[r] < 0) outband[r] = nout++;

  // Out-of-band couplings B_k = (rows outside, columns inside) of the wider generators.
  std::vector<int> edge_pos(d, -1);
  std::vector<int> edge;
  std::vector<std::vector<Eigen::Triplet<cplx>>> btrip(family.size());
  double bnorm2 = 0;
  for (std::size_t k = 0; k < family.size(); ++k) {
    std::vector<Eigen::Triplet<cplx>> in;
    for (int j = 0; j < d; ++j) {
      for (SparseCplx::InnerIterator it(wider[k], embed[j]); it; ++it) {
        const int r = static_cast<int>(it.row());
        if (inband[r] >= 0) {
          in.emplace_back(inband[r], j, it.value());
        } else {
          if (edge_pos[j] < 0) {
            edge_pos[j] = static_cast<int>(edge.size());
            edge.push_back(j);
          }
          btrip[k].emplace_back(outband[r], j, it.value());
          bnorm2 += std::norm(it.value());
        }
      }
    }
    SparseCplx inner(d, d);
    inner.setFromTriplets(in.begin(), in.end());
    if ((inner - family[k]).norm() > 1e-12 * std::max(family.scale(), 1.0))
      throw ConfigError("twopoint", "resolved_kernel", "wider family does not restrict to the given family");
  }

  KernelBasis out = basis;
  KernelFactors& f = KernelAccess::factors(out);
  if (bnorm2 == 0) return out;
  const double thr = tol * bnorm2;

  // W_g = sum_k (B_k Q_g)^H (B_k Q_g), using only the edge rows of Q.
  const int ne = static_cast<int>(edge.size());
  Eigen::MatrixXcd qe(ne, d);
  for (int e = 0; e < ne; ++e)
    qe.row(e) = f.real_q ? Eigen::RowVectorXcd(f.q_real.row(edge[e]).cast<cplx>()) : f.q_cplx.row(edge[e]);
  std::vector<Eigen::MatrixXcd> bq;
  for (std::size_t k = 0; k < family.size(); ++k) {
    Eigen::MatrixXcd bd = Eigen::MatrixXcd::Zero(nout, ne);
    for (const auto& t : btrip[k]) bd(t.row(), edge_pos[t.col()]) += t.value();
    bq.push_back(bd * qe);
  }
  auto leak_gram = [&](int g) {
    Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(f.size[g], f.size[g]);
    for (const auto& m : bq) {
      const auto c = m.middleCols(f.offset[g], f.size[g]);
      w += c.adjoint() * c;
    }
    return w;
  };

  const Eigen::Index rc = f.coupled.cols();
  if (rc > 0) {
    Eigen::MatrixXd gmat = Eigen::MatrixXd::Zero(rc, rc);
    for (std::size_t pg = 0; pg < f.param_group.size(); ++pg) {
      const Eigen::MatrixXcd w = leak_gram(f.param_group[pg]);
      if (w.norm() == 0) continue;
      std::vector<Eigen::MatrixXcd> x(rc), wx(rc);
      for (Eigen::Index e = 0; e < rc; ++e) {
        x[e] = f.coupled_block(e, pg);
        wx[e] = w * x[e];
      }
      for (Eigen::Index i = 0; i < rc; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) {
          const double v = (x[i].adjoint() * wx[j]).trace().real();
          gmat(i, j) += v;
          if (i != j) gmat(j, i) += v;
        }
    }
    const auto e = linalg::eigh(gmat);
    Eigen::Index keep = 0;
    while (keep < rc && e.values[keep] <= thr) ++keep;
    f.coupled = keep > 0 ? Eigen::MatrixXd(f.coupled * e.vectors.leftCols(keep)) : Eigen::MatrixXd(f.coupled.rows(), 0);
  }
  std::vector<int> groups;
  std::vector<Eigen::MatrixXcd> spans;
  for (std::size_t j = 0; j < f.free_group.size(); ++j) {
    const Eigen::MatrixXcd& span = f.free_span[j];
    const Eigen::MatrixXcd s = span.adjoint() * leak_gram(f.free_group[j]) * span;
    const auto e = linalg::eigh(Eigen::MatrixXcd(0.5 * (s + s.adjoint())));
    Eigen::Index keep = 0;
    while (keep < e.values.size() && e.values[keep] <= thr) ++keep;
    if (keep == 0) continue;
    groups.push_back(f.free_group[j]);
    spans.push_back(span * e.vectors.leftCols(keep));
  }
  f.free_group = std::move(groups);
  f.free_span = std::move(spans);
  out.gram_defect = gram_defect(f.coupled);
  return out;
}

}  // namespace dlab
