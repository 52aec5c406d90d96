#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dlab/numerics.hpp"
#include "dlab/profiles.hpp"

namespace dlab {

using SparseCplx = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;

/// Where a generator family came from when it is a Fourier truncation.
struct FourierProvenance {
  std::string kind;  // "shear" or "2d"
  int cutoff = 0;
  /// Largest wavenumber shift produced by one application of a generator.
  int reach = 0;
  bool mean_free = false;
  /// Wavevector (m, n) of each basis index; for shear truncations m = ell.
  std::vector<std::array<int, 2>> modes;
  /// ||A - (A - A^H)/2||_F summed over generators before anti-symmetrization.
  double symmetrization_correction = 0.0;
};

/// Anti-Hermitian d x d matrices A_k = i L_k.
class GeneratorFamily {
 public:
  GeneratorFamily() = default;
  explicit GeneratorFamily(const std::vector<Eigen::MatrixXcd>& a, double tol = 1e-12);
  GeneratorFamily(std::vector<SparseCplx> a, std::optional<FourierProvenance> provenance, double tol = 1e-12);
  /// A_k = i L_k from Hermitian L_k.
  static GeneratorFamily from_hermitian(const std::vector<Eigen::MatrixXcd>& l);

  int dim() const { return dim_; }
  std::size_t size() const { return a_.size(); }
  const SparseCplx& operator[](std::size_t k) const { return a_[k]; }
  Eigen::MatrixXcd dense(std::size_t k) const { return Eigen::MatrixXcd(a_[k]); }
  /// True when every A_k has zero imaginary part.
  bool is_real() const { return real_; }
  const std::optional<FourierProvenance>& provenance() const { return provenance_; }
  /// max_k ||A_k||_F.
  double scale() const { return scale_; }

 private:
  void validate(double tol);

  int dim_ = 0;
  std::vector<SparseCplx> a_;
  std::optional<FourierProvenance> provenance_;
  bool real_ = false;
  double scale_ = 0.0;
};

/// Orthonormal basis of the real space of d x d Hermitian matrices:
/// E_aa, (E_ab + E_ba)/sqrt2, i(E_ab - E_ba)/sqrt2 for a < b.
Eigen::VectorXd hermitian_coordinates(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd hermitian_from_coordinates(int d, const double* x);

/// The d^2 x d^2 real symmetric matrix of M -> -1/2 sum_k [L_k, [L_k, M]]
/// in the Hermitian basis above.
Eigen::MatrixXd build_superoperator(const GeneratorFamily& family);

/// Apply the superoperator to one matrix.
Eigen::MatrixXcd apply_superoperator(const GeneratorFamily& family, const Eigen::MatrixXcd& m);

struct KernelOptions {
  /// Eigenvalues of -L below tol_null * max are kernel.
  double tol_null = 1e-9;
  /// Required ratio between the first dropped and last kept eigenvalue.
  double min_gap = 10.0;
  /// Largest d handled by the explicit superoperator.
  int dense_max_dim = 32;
  /// Check the explicit route against the direct commutant solve.
  bool verify = true;
  /// Use a real orthogonal frame when every generator is real.
  bool prefer_real = true;
  std::uint64_t seed = 0x6b65726e656cULL;
};

/// Block structure of a kernel in the eigenbasis Q of a generic Hermitian
/// element of the generated algebra: every kernel element is Q X Q^H with X
/// block diagonal over the eigenvalue groups of that element.
struct KernelFactors {
  bool real_q = false;
  Eigen::MatrixXd q_real;
  Eigen::MatrixXcd q_cplx;
  /// Column offset and size of each group.
  std::vector<int> offset, size;
  /// Groups whose blocks are solved for, and their offsets in a parameter
  /// vector (Hermitian coordinates of each block, concatenated).
  std::vector<int> param_group, param_offset;
  /// Parameter vectors of the coupled kernel elements, one per column.
  Eigen::MatrixXd coupled;
  /// Groups on which every generator is a multiple of the identity and which
  /// no generator leaves: all Hermitian matrices on span(Q_g W_g) are kernel.
  std::vector<int> free_group;
  std::vector<Eigen::MatrixXcd> free_span;

  int d() const { return real_q ? static_cast<int>(q_real.rows()) : static_cast<int>(q_cplx.rows()); }
  /// Columns of Q belonging to group g.
  Eigen::MatrixXcd q_block(int g) const;
  /// Block of coupled element e on the i-th parameter group.
  Eigen::MatrixXcd coupled_block(Eigen::Index e, std::size_t i) const;
};

/// Orthonormal Hermitian basis of Ker of the two-point superoperator.
class KernelBasis {
 public:
  int dim() const { return f_.d(); }
  /// Number of orthonormal Hermitian basis elements.
  long rank() const;
  Eigen::MatrixXcd matrix(long i) const;
  /// "dense" (explicit superoperator) or "reduced" (block reduction).
  const std::string& route() const { return route_; }
  double tol_null() const { return tol_null_; }
  const KernelFactors& factors() const { return f_; }

  /// max_{k,i} ||[L_k, M_i]||_F.
  double commutator_residual = 0.0;
  /// max |Gram - I| over the coupled elements.
  double gram_defect = 0.0;
  /// First dropped over last kept eigenvalue (first dropped over the
  /// threshold when nothing is kept; inf when nothing is dropped).
  double gap_ratio = 0.0;
  /// Dimension and principal-angle check from the direct commutant solve.
  std::optional<long> oracle_dim;
  std::optional<double> oracle_max_sine;

 private:
  friend struct KernelAccess;
  KernelFactors f_;
  std::string route_;
  double tol_null_ = 0.0;
};

/// Kernel by the explicit superoperator (d <= dense_max_dim) or by
/// reduction to the block structure of a generic Hermitian algebra element.
KernelBasis kernel_basis(const GeneratorFamily& family, const KernelOptions& opts = {});

/// Independent oracle: Hermitian solutions of [L_k, M] = 0 from the SVD of
/// the stacked commutator system. Columns are Hermitian coordinates.
Eigen::MatrixXd commutant_oracle(const GeneratorFamily& family, double tol = 1e-9);

/// Kernel elements M whose zero-padding also commutes with the generators of
/// a wider truncation (the ones that do not lean on the band edge).
/// `embed[i]` is the index in `wider` of basis index i.
KernelBasis resolved_kernel(const KernelBasis& basis, const GeneratorFamily& family, const GeneratorFamily& wider,
                            const std::vector<int>& embed, double tol = 1e-9);

struct InvariantDecomposition {
  /// Orthonormal bases of the ranges of P_j.
  std::vector<Eigen::MatrixXcd> bases;
  /// Eigenvalue of the probing element on each range.
  std::vector<double> gamma;
  /// True when coefficient redraws never separated the blocks and coupled
  /// pieces were merged.
  bool degenerate = false;
  int draws = 0;
  /// max_{j,k} ||(I - P_j) L_k P_j|| / max_k ||A_k||_F.
  double invariance_defect = 0.0;
  /// max_{j,k} ||P_j L_k - L_k P_j||, same scaling.
  double commutation_defect = 0.0;
  /// max ||P_i P_j - delta_ij P_i||.
  double orthogonality_defect = 0.0;

  std::size_t count() const { return bases.size(); }
  Eigen::MatrixXcd projector(std::size_t j) const { return bases[j] * bases[j].adjoint(); }
};

struct InvariantOptions {
  /// Eigenvalues closer than this fraction of the spread are one block.
  double merge_tol = 1e-6;
  /// Relative to max_k ||A_k||_F.
  double tol_inv = 1e-8;
  int max_draws = 5;
  std::uint64_t seed = 0x696e76ULL;
  /// Merge eigenspaces linked by kernel elements (isotypic components).
  /// When false the eigenspaces of the probe are returned as they are.
  bool isotypic = true;
  /// Optional diagonal of a Hermitian matrix projected onto the kernel and
  /// used as the probe, with a small generic perturbation added.
  std::optional<Eigen::VectorXd> probe_diagonal;
};

InvariantDecomposition invariant_subspaces(const KernelBasis& basis, const GeneratorFamily& family,
                                           const InvariantOptions& opts = {});

/// A_j = i ell (convolution by the Fourier coefficients of u_j) on modes
/// |n| <= K of a fixed x-mode ell.
GeneratorFamily galerkin_shear(const ProfileFamily& family, int ell, int cutoff);

/// Real trigonometric vector field on the 2-torus, stored by its complex
/// Fourier coefficients sigma^(p, q) (x-wavenumber p, y-wavenumber q).
struct TrigField2D {
  std::map<std::pair<int, int>, std::array<cplx, 2>> coeffs;

  /// (u(y), 0) and (0, u(x)).
  static TrigField2D shear_x(const ShearProfile& u);
  static TrigField2D shear_y(const ShearProfile& u);
  int degree() const;
  /// max_p |p . sigma^(p)|.
  double divergence_defect() const;
};

/// Matrices of sigma_k . grad on e^{i(mx+ny)}, 0 < max(|m|,|n|) <= K
/// (the zero mode is kept when mean_free is false).
GeneratorFamily galerkin_2d(const std::vector<TrigField2D>& fields, int cutoff, bool mean_free = true);

using FamilyBuilder = std::function<GeneratorFamily(int cutoff)>;

struct SubspaceSummary {
  int dim = 0;
  double h1_max = 0.0;
};

struct CutoffDiagnostic {
  int cutoff = 0;
  int dim = 0;
  long kernel_dim = 0;
  long resolved_dim = 0;
  double commutant_check_max = 0.0;
  std::vector<SubspaceSummary> subspaces;
  /// min over subspaces of h1_max (inf when there are none).
  double h1_min = 0.0;
};

struct EnhancementReport {
  std::vector<CutoffDiagnostic> cutoffs;
  /// "enhancing", "invariant_subspace_found" or "inconclusive".
  std::string verdict;
  std::string detail;
};

/// Per-cutoff kernel and invariant-subspace diagnostic with an H^1 trend
/// verdict. Needs at least three increasing cutoffs and Fourier provenance.
EnhancementReport enhancement_diagnostic(const FamilyBuilder& builder, const std::vector<int>& cutoffs,
                                         const KernelOptions& opts = {});

/// Shear families built from non-constant trigonometric polynomials never
/// have an interval of constancy, so this is always true; kept explicit.
bool shear_enhancing(const ProfileFamily& family);

enum class MeasureSector { full, trace_free };

struct InvariantMeasureResult {
  bool exists = false;
  /// Basis of a witnessing invariant subspace, in the original coordinates.
  Eigen::MatrixXcd witness;
  long kernel_dim = 0;
};

/// Kernel of the superoperator restricted to range(P), optionally to its
/// trace-free Hermitian part. P must commute with every A_k.
InvariantMeasureResult has_invariant_measure(const GeneratorFamily& family, const Eigen::MatrixXcd& projector,
                                             MeasureSector sector = MeasureSector::full, double tol = 1e-9);

/// Discrete H^1 norm sqrt(sum |k|^2 |c_k|^2) of a coefficient vector.
double fourier_h1(const FourierProvenance& prov, const Eigen::VectorXcd& c);

}  // namespace dlab
