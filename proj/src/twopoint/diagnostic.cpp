#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "dlab/error.hpp"
#include "dlab/linalg.hpp"
#include "dlab/twopoint.hpp"

namespace dlab {
namespace {

std::vector<int> embedding(const FourierProvenance& inner, const FourierProvenance& outer) {
  std::map<std::array<int, 2>, int> where;
  for (std::size_t i = 0; i < outer.modes.size(); ++i) where[outer.modes[i]] = static_cast<int>(i);
  std::vector<int> e;
  for (const auto& m : inner.modes) {
    auto it = where.find(m);
    if (it == where.end())
      throw ConfigError("twopoint", "enhancement_diagnostic", "wider truncation does not contain the narrower one");
    e.push_back(it->second);
  }
  return e;
}

CutoffDiagnostic diagnose(const FamilyBuilder& builder, int cutoff, const KernelOptions& opts) {
  const GeneratorFamily fam = builder(cutoff);
  if (!fam.provenance()) throw ConfigError("twopoint", "enhancement_diagnostic", "family has no Fourier provenance");
  const FourierProvenance& prov = *fam.provenance();
  const GeneratorFamily wider = builder(cutoff + std::max(prov.reach, 1));
  CutoffDiagnostic c;
  c.cutoff = cutoff;
  c.dim = fam.dim();
  const KernelBasis kb = kernel_basis(fam, opts);
  c.kernel_dim = kb.rank();
  c.commutant_check_max = kb.commutator_residual;
  const KernelBasis res = resolved_kernel(kb, fam, wider, embedding(prov, *wider.provenance()));
  c.resolved_dim = res.rank();
  c.h1_min = std::numeric_limits<double>::infinity();
  if (c.resolved_dim == 0) return c;

  InvariantOptions io;
  io.isotypic = false;
  Eigen::VectorXd lap(fam.dim());
  for (int i = 0; i < fam.dim(); ++i) {
    const auto [m, n] = prov.modes[i];
    lap[i] = double(m * m + n * n);
  }
  io.probe_diagonal = lap;
  const InvariantDecomposition dec = invariant_subspaces(res, fam, io);
  double gmax = 0;
  for (double g : dec.gamma) gmax = std::max(gmax, std::abs(g));
  for (std::size_t j = 0; j < dec.count(); ++j) {
    // The common null space of the kernel is the complement, not a detected subspace.
    if (std::abs(dec.gamma[j]) <= 1e-9 * gmax) continue;
    const Eigen::MatrixXcd& u = dec.bases[j];
    const Eigen::MatrixXcd h = u.adjoint() * lap.asDiagonal() * u;
    const double top = linalg::eigh(Eigen::MatrixXcd(0.5 * (h + h.adjoint()))).values.maxCoeff();
    SubspaceSummary s;
    s.dim = static_cast<int>(u.cols());
    s.h1_max = std::sqrt(std::max(top, 0.0));
    c.h1_min = std::min(c.h1_min, s.h1_max);
    c.subspaces.push_back(s);
  }
  return c;
}

}  // namespace

EnhancementReport enhancement_diagnostic(const FamilyBuilder& builder, const std::vector<int>& cutoffs,
                                         const KernelOptions& opts) {
  if (cutoffs.size() < 3) throw ConfigError("twopoint", "enhancement_diagnostic", "need at least three cutoffs");
  for (std::size_t i = 1; i < cutoffs.size(); ++i)
    if (cutoffs[i] <= cutoffs[i - 1])
      throw ConfigError("twopoint", "enhancement_diagnostic", "cutoffs must be strictly increasing");
  EnhancementReport rep;
  for (int k : cutoffs) rep.cutoffs.push_back(diagnose(builder, k, opts));

  bool all_zero = true, all_positive = true;
  for (const auto& c : rep.cutoffs) {
    if (c.resolved_dim > 0) all_zero = false;
    if (c.resolved_dim == 0) all_positive = false;
  }
  std::ostringstream os;
  if (all_zero) {
    rep.verdict = "enhancing";
    os << "no finite-dimensional H1 invariant subspace detected: resolved kernel trivial at every cutoff";
  } else if (all_positive) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    bool increasing = true;
    for (std::size_t i = 0; i < rep.cutoffs.size(); ++i) {
      lo = std::min(lo, rep.cutoffs[i].h1_min);
      hi = std::max(hi, rep.cutoffs[i].h1_min);
      if (i > 0 && !(rep.cutoffs[i].h1_min > rep.cutoffs[i - 1].h1_min)) increasing = false;
    }
    if (hi <= 1.25 * lo) {
      rep.verdict = "invariant_subspace_found";
      os << "invariant subspace with H1 norm " << lo << " stable across cutoffs";
    } else if (increasing && rep.cutoffs.back().h1_min >= 1.5 * rep.cutoffs.front().h1_min) {
      rep.verdict = "enhancing";
      os << "kernel elements present at every cutoff but their H1 norms grow monotonically (" << lo << " to " << hi
         << ")";
    } else {
      rep.verdict = "inconclusive";
      os << "kernel present at every cutoff without a clear H1 trend (" << lo << " to " << hi << ")";
    }
  } else {
    rep.verdict = "inconclusive";
    os << "resolved kernel dimension changes between zero and nonzero across cutoffs";
  }
  rep.detail = os.str();
  return rep;
}

}  // namespace dlab
