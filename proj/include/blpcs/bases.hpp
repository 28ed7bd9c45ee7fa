#pragma once

#include "blpcs/ensembles.hpp"
#include "blpcs/permutation.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace blpcs {

using ComplexMatrix = Eigen::MatrixXcd;

/// Orthonormal DCT-II analysis matrix, C(l, i) = eps_l / sqrt(n) * cos(pi (2i+1) l / (2n))
/// with eps_0 = 1 and eps_l = sqrt(2) otherwise. Rows index frequency.
DenseMatrix dct_matrix(std::size_t n);

/// Unitary diagonalization C = U diag(exp(j phi)) U^*.
struct EigenSystem {
  ComplexMatrix U;
  std::vector<double> phis;  // principal arguments in (-pi, pi], ascending
  double reconstruction_error = 0.0;
};

/// Eigensystem of dct_matrix(n). Computed through a complex Schur
/// factorization, whose triangular factor is diagonal for a normal matrix, so
/// U stays unitary even inside repeated eigenspaces. Results are memoized.
const EigenSystem& dct_eigensystem(std::size_t n);

/// U diag(exp(j alpha phi)) U^*.
ComplexMatrix fractional_power(const EigenSystem& eig, double alpha);

/// Discrete fractional cosine transform of order alpha.
ComplexMatrix dfrct_matrix(std::size_t n, double alpha);

/// Reality-preserving fractional cosine transform of even size M:
/// R = [[Re B, -Im B], [Im B, Re B]] with B = dfrct_matrix(M/2, alpha).
/// The first half of the input is the real part of the packed complex
/// signal, the second half the imaginary part.
DenseMatrix rpfrct_matrix(std::size_t M, double alpha);

/// S = R_alpha X R_beta^T, i.e. vec(S) = (R_beta kron R_alpha) vec(X).
DenseMatrix rpfrct2d_forward(const DenseMatrix& X, const DenseMatrix& r_alpha,
                             const DenseMatrix& r_beta);
DenseMatrix rpfrct2d_inverse(const DenseMatrix& S, const DenseMatrix& r_alpha,
                             const DenseMatrix& r_beta);
DenseMatrix rpfrct2d_forward(const DenseMatrix& X, double alpha, double beta);
DenseMatrix rpfrct2d_inverse(const DenseMatrix& S, double alpha, double beta);

/// A sparsifying basis held as a pair of maps: synthesize x = Psi s and
/// analyze s = Psi^{-1} x. Compositions never materialize Psi.
class Basis {
 public:
  using Map = std::function<Vector(const Vector&)>;

  Basis(std::size_t dim, Map synthesize, Map analyze);

  std::size_t dim() const { return dim_; }
  Vector synthesize(const Vector& s) const;
  Vector analyze(const Vector& x) const;

  /// Dense Psi / Psi^{-1}; refused above 4096 to keep memory bounded.
  DenseMatrix synthesis_matrix() const;
  DenseMatrix analysis_matrix() const;

 private:
  std::size_t dim_;
  Map synthesize_;
  Map analyze_;
};

Basis identity_basis(std::size_t n);
/// Psi with orthonormal columns; analysis uses Psi^T.
Basis orthonormal_basis(DenseMatrix psi);
/// Psi = C^T with C the DCT analysis matrix.
Basis dct_basis(std::size_t n);
/// Psi = R_alpha^T.
Basis rpfrct_basis(std::size_t M, double alpha);
/// Psi = (R_beta kron R_alpha)^T acting on column-major vec of an n x n image.
Basis rpfrct2d_basis(std::size_t n, double alpha, double beta);

/// Coefficient-index set used by the column-mixing operator.
class IndexRegion {
 public:
  IndexRegion() = default;
  explicit IndexRegion(std::vector<bool> member) : member_(std::move(member)) {}
  static IndexRegion from_indices(std::size_t dim, const std::vector<std::size_t>& idx);

  std::size_t dim() const { return member_.size(); }
  bool contains(std::size_t i) const { return i < member_.size() && member_[i]; }
  std::vector<std::size_t> indices() const;
  /// Region seen from a permuted basis Psi P: column j maps to original column map^{-1}(j).
  IndexRegion through(const Permutation& p) const;

 private:
  std::vector<bool> member_;
};

/// Low-order corner of each half of a 1D RPFrCT coefficient vector:
/// {0..r-1} and {M/2..M/2+r-1}.
IndexRegion significant_region_1d(std::size_t M, std::size_t r);
/// Upper-left r x r corner of each of the four n/2 x n/2 sub-blocks of a 2D
/// RPFrCT coefficient matrix, as column-major vec indices.
IndexRegion significant_region_2d(std::size_t n, std::size_t r);

/// F1: Psi' = (d_1 psi_1, ..., d_M psi_M); coefficients become s'_j = s_j / d_j.
Basis f1_scale(const Basis& base, const ScalingDiag& d);
/// Same operator with explicit factors, allowing negative (but non-zero) values.
Basis f1_scale(const Basis& base, const std::vector<double>& factors);

/// F2: Psi' = Psi P; coefficients become s' = P^T s.
Basis f2_permute(const Basis& base, const Permutation& p);

/// Replace psi_j by a psi_j + b psi_k.
struct ColumnMix {
  std::size_t j = 0;
  std::size_t k = 0;
  double a = 1.0;
  double b = 0.0;
};

/// F3: applies every mix record. Records must use disjoint indices, a != 0,
/// and each pair must lie entirely inside or entirely outside `region`.
/// Coefficients update as s'_j = s_j / a, s'_k = s_k - s_j b / a.
Basis f3_mix(const Basis& base, std::vector<ColumnMix> mixes, const IndexRegion& region);

/// Coefficient map of F3 alone, exposed for direct checks: s -> s'.
Vector f3_coefficients(const Vector& s, const std::vector<ColumnMix>& mixes);

enum class BasisLayout { vector1d, image2d };

/// Psi_K = Psi_R P D Q with Psi_R = R_alpha^T (1D) or (R_beta kron R_alpha)^T
/// (2D), P a permutation, D = diag(1/d_j) and Q the column mixes.
struct SecretBasisSpec {
  BasisLayout layout = BasisLayout::vector1d;
  std::size_t n = 0;  // 1D signal length or image side
  double alpha = 1.0;
  double beta = 1.0;
  Permutation perm;            // empty means identity
  ScalingDiag scale;           // empty means all ones
  std::vector<ColumnMix> mixes;
  IndexRegion region;          // in Psi_R coefficient indices

  std::size_t dim() const { return layout == BasisLayout::vector1d ? n : n * n; }
};

void validate(const SecretBasisSpec& spec);
Basis build_secret_basis(const SecretBasisSpec& spec);

/// Keeps the s entries of largest magnitude (ties go to the lower index).
Vector best_s_term(const Vector& coeffs, std::size_t s);

}  // namespace blpcs
