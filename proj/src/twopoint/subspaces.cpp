#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dlab/error.hpp"
#include "dlab/linalg.hpp"
#include "dlab/twopoint.hpp"

namespace dlab {
namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); }
  void join(int a, int b) { parent[find(a)] = find(b); }
};

Eigen::MatrixXcd random_hermitian(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd h(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) h(i, j) = cplx(nd(rng), nd(rng));
  return 0.5 * (h + h.adjoint());
}

// One eigenvector of the probe, living on a single group.
struct Piece {
  double value;
  int group;
  Eigen::VectorXcd v;  // coordinates inside the group
};

struct Draw {
  std::vector<Piece> pieces;
  std::vector<int> cluster;  // per piece
  int nclusters = 0;
};

Draw eigen_pieces(const KernelBasis& basis, const InvariantOptions& opts, std::mt19937_64& rng) {
  const KernelFactors& f = basis.factors();
  const int ngroups = static_cast<int>(f.offset.size());
  std::vector<Eigen::MatrixXcd> blocks(ngroups);
  for (int g = 0; g < ngroups; ++g) blocks[g] = Eigen::MatrixXcd::Zero(f.size[g], f.size[g]);

  std::normal_distribution<double> nd;
  Eigen::VectorXd coef(f.coupled.cols());
  for (auto& c : coef) c = nd(rng);
  std::vector<Eigen::MatrixXcd> free_rand;
  for (const auto& w : f.free_span) free_rand.push_back(random_hermitian(static_cast<int>(w.cols()), rng));

  if (opts.probe_diagonal) {
    // Orthogonal projection of diag(D) onto the kernel, plus a small generic part.
    const Eigen::VectorXd& dvec = *opts.probe_diagonal;
    if (dvec.size() != basis.dim()) throw ConfigError("twopoint", "invariant_subspaces", "probe size mismatch");
    auto rotated = [&](int g) {
      const Eigen::MatrixXcd qg = f.q_block(g);
      return Eigen::MatrixXcd(qg.adjoint() * dvec.asDiagonal() * qg);
    };
    Eigen::VectorXd proj = Eigen::VectorXd::Zero(f.coupled.cols());
    for (std::size_t pg = 0; pg < f.param_group.size(); ++pg) {
      const Eigen::MatrixXcd dg = rotated(f.param_group[pg]);
      for (Eigen::Index e = 0; e < f.coupled.cols(); ++e)
        proj[e] += (f.coupled_block(e, pg).adjoint() * dg).trace().real();
    }
    std::vector<Eigen::MatrixXcd> free_proj;
    double pnorm2 = proj.squaredNorm(), rnorm2 = coef.squaredNorm();
    for (std::size_t j = 0; j < f.free_group.size(); ++j) {
      const Eigen::MatrixXcd& w = f.free_span[j];
      free_proj.push_back(w.adjoint() * rotated(f.free_group[j]) * w);
      pnorm2 += free_proj.back().squaredNorm();
      rnorm2 += free_rand[j].squaredNorm();
    }
    const double eps = rnorm2 > 0 ? 1e-3 * std::sqrt(pnorm2 / rnorm2) : 0.0;
    coef = proj + eps * coef;
    for (std::size_t j = 0; j < free_rand.size(); ++j) free_rand[j] = free_proj[j] + eps * free_rand[j];
  }

  const Eigen::VectorXd x =
      f.coupled.cols() > 0 ? Eigen::VectorXd(f.coupled * coef) : Eigen::VectorXd::Zero(f.coupled.rows());
  for (std::size_t pg = 0; pg < f.param_group.size(); ++pg) {
    blocks[f.param_group[pg]] +=
        hermitian_from_coordinates(f.size[f.param_group[pg]], x.data() + f.param_offset[pg]);
  }
  for (std::size_t j = 0; j < f.free_group.size(); ++j)
    blocks[f.free_group[j]] += f.free_span[j] * free_rand[j] * f.free_span[j].adjoint();

  Draw dr;
  for (int g = 0; g < ngroups; ++g) {
    const auto e = linalg::eigh(Eigen::MatrixXcd(0.5 * (blocks[g] + blocks[g].adjoint())));
    for (int i = 0; i < f.size[g]; ++i) dr.pieces.push_back({e.values[i], g, e.vectors.col(i)});
  }
  std::vector<int> order(dr.pieces.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return dr.pieces[a].value < dr.pieces[b].value; });
  const double spread = dr.pieces[order.back()].value - dr.pieces[order.front()].value;
  dr.cluster.assign(dr.pieces.size(), 0);
  for (std::size_t i = 1; i < order.size(); ++i) {
    const bool split = dr.pieces[order[i]].value - dr.pieces[order[i - 1]].value > opts.merge_tol * spread;
    dr.cluster[order[i]] = dr.cluster[order[i - 1]] + (split ? 1 : 0);
  }
  dr.nclusters = order.empty() ? 0 : dr.cluster[order.back()] + 1;
  return dr;
}

// Joins clusters linked by some kernel element (isotypic components).
void merge_linked(const KernelBasis& basis, Draw& dr) {
  const KernelFactors& f = basis.factors();
  UnionFind uf(dr.nclusters);
  std::vector<std::vector<int>> by_group(f.offset.size());
  for (std::size_t i = 0; i < dr.pieces.size(); ++i) by_group[dr.pieces[i].group].push_back(static_cast<int>(i));
  for (std::size_t pg = 0; pg < f.param_group.size(); ++pg) {
    const auto& ids = by_group[f.param_group[pg]];
    Eigen::MatrixXcd v(f.size[f.param_group[pg]], ids.size());
    for (std::size_t c = 0; c < ids.size(); ++c) v.col(c) = dr.pieces[ids[c]].v;
    for (Eigen::Index e = 0; e < f.coupled.cols(); ++e) {
      const Eigen::MatrixXcd x = f.coupled_block(e, pg);
      const Eigen::MatrixXcd z = v.adjoint() * x * v;
      const double lim = 1e-8 * std::max(x.norm(), 1e-300);
      for (std::size_t a = 0; a < ids.size(); ++a)
        for (std::size_t b = 0; b < ids.size(); ++b)
          if (std::abs(z(a, b)) > lim) uf.join(dr.cluster[ids[a]], dr.cluster[ids[b]]);
    }
  }
  for (std::size_t j = 0; j < f.free_group.size(); ++j) {
    int first = -1;
    for (int id : by_group[f.free_group[j]]) {
      if ((f.free_span[j].adjoint() * dr.pieces[id].v).norm() < 0.5) continue;
      if (first < 0) first = dr.cluster[id];
      uf.join(dr.cluster[id], first);
    }
  }
  std::vector<int> relabel(dr.nclusters, -1);
  int next = 0;
  for (auto& c : dr.cluster) {
    const int root = uf.find(c);
    if (relabel[root] < 0) relabel[root] = next++;
    c = relabel[root];
  }
  dr.nclusters = next;
}

InvariantDecomposition assemble(const KernelBasis& basis, const GeneratorFamily& family, const Draw& dr) {
  const KernelFactors& f = basis.factors();
  const int d = basis.dim();
  std::vector<std::vector<int>> members(dr.nclusters);
  for (std::size_t i = 0; i < dr.pieces.size(); ++i) members[dr.cluster[i]].push_back(static_cast<int>(i));
  InvariantDecomposition out;
  for (const auto& ids : members) {
    Eigen::MatrixXcd u(d, ids.size());
    double gamma = 0;
    for (std::size_t c = 0; c < ids.size(); ++c) {
      const Piece& p = dr.pieces[ids[c]];
      u.col(c) = f.q_block(p.group) * p.v;
      gamma += p.value;
    }
    out.bases.push_back(std::move(u));
    out.gamma.push_back(gamma / ids.size());
  }
  // Defects.
  const double s = std::max(family.scale(), 1e-300);
  for (const auto& u : out.bases) {
    for (std::size_t k = 0; k < family.size(); ++k) {
      const Eigen::MatrixXcd au = family[k] * u;
      const double inv = (au - u * (u.adjoint() * au)).norm() / s;
      out.invariance_defect = std::max(out.invariance_defect, inv);
    }
  }
  // For anti-Hermitian A, ||PA - AP|| = sqrt2 ||(I - P) A P||.
  out.commutation_defect = std::sqrt(2.0) * out.invariance_defect;
  Eigen::MatrixXcd all(d, d);
  Eigen::Index col = 0;
  for (const auto& u : out.bases) {
    all.middleCols(col, u.cols()) = u;
    col += u.cols();
  }
  out.orthogonality_defect = (all.adjoint() * all - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace

InvariantDecomposition invariant_subspaces(const KernelBasis& basis, const GeneratorFamily& family,
                                           const InvariantOptions& opts) {
  if (basis.rank() < 1) throw ConfigError("twopoint", "invariant_subspaces", "kernel is trivial");
  if (basis.dim() != family.dim()) throw ConfigError("twopoint", "invariant_subspaces", "dimension mismatch");
  Draw last;
  for (int draw = 0; draw < std::max(opts.max_draws, 1); ++draw) {
    std::mt19937_64 rng(opts.seed + static_cast<std::uint64_t>(draw));
    Draw dr = eigen_pieces(basis, opts, rng);
    if (opts.isotypic) merge_linked(basis, dr);
    InvariantDecomposition dec = assemble(basis, family, dr);
    dec.draws = draw + 1;
    if (dec.invariance_defect <= opts.tol_inv && dec.orthogonality_defect <= 1e-8) return dec;
    last = std::move(dr);
  }
  // Coarsen: join clusters that the generators still connect.
  InvariantDecomposition trial = assemble(basis, family, last);
  UnionFind uf(last.nclusters);
  const double lim = opts.tol_inv * family.scale();
  for (int i = 0; i < last.nclusters; ++i)
    for (int j = 0; j < last.nclusters; ++j) {
      if (i == j) continue;
      for (std::size_t k = 0; k < family.size(); ++k) {
        const Eigen::MatrixXcd c = trial.bases[i].adjoint() * (family[k] * trial.bases[j]);
        if (c.norm() > lim) uf.join(i, j);
      }
    }
  std::vector<int> relabel(last.nclusters, -1);
  int next = 0;
  for (auto& c : last.cluster) {
    const int root = uf.find(c);
    if (relabel[root] < 0) relabel[root] = next++;
    c = relabel[root];
  }
  last.nclusters = next;
  InvariantDecomposition dec = assemble(basis, family, last);
  dec.degenerate = true;
  dec.draws = std::max(opts.max_draws, 1);
  return dec;
}

InvariantMeasureResult has_invariant_measure(const GeneratorFamily& family, const Eigen::MatrixXcd& projector,
                                             MeasureSector sector, double tol) {
  const int d = family.dim();
  if (projector.rows() != d || projector.cols() != d)
    throw ConfigError("twopoint", "has_invariant_measure", "projector size differs from the family dimension");
  const Eigen::MatrixXcd ph = 0.5 * (projector + projector.adjoint());
  if ((projector - ph).norm() > 1e-8 * std::max(1.0, projector.norm()) || (ph * ph - ph).norm() > 1e-8 * d)
    throw ConfigError("twopoint", "has_invariant_measure", "projector is not an orthogonal projection");
  for (std::size_t k = 0; k < family.size(); ++k) {
    const Eigen::MatrixXcd a = family.dense(k);
    if ((ph * a - a * ph).norm() > 1e-8 * std::max(family.scale(), 1.0))
      throw ConfigError("twopoint", "has_invariant_measure", "projector does not commute with generator " +
                                                                 std::to_string(k));
  }
  InvariantMeasureResult res;
  const auto e = linalg::eigh(Eigen::MatrixXcd(ph));
  Eigen::Index lo = 0;
  while (lo < d && e.values[lo] < 0.5) ++lo;
  const Eigen::MatrixXcd u = e.vectors.rightCols(d - lo);
  if (u.cols() == 0) return res;

  std::vector<Eigen::MatrixXcd> restricted;
  for (std::size_t k = 0; k < family.size(); ++k) {
    const Eigen::MatrixXcd r = u.adjoint() * family.dense(k) * u;
    restricted.push_back(0.5 * (r - r.adjoint()));
  }
  const GeneratorFamily sub(restricted, 1e-8);
  KernelOptions ko;
  ko.tol_null = tol;
  const KernelBasis kb = kernel_basis(sub, ko);
  // The identity is always in the kernel; the trace-free sector drops it.
  res.kernel_dim = sector == MeasureSector::full ? kb.rank() : kb.rank() - 1;
  res.exists = res.kernel_dim > 0;
  if (!res.exists) return res;
  InvariantOptions io;
  io.isotypic = false;
  const InvariantDecomposition dec = invariant_subspaces(kb, sub, io);
  res.witness = u * dec.bases.front();
  return res;
}

}  // namespace dlab
