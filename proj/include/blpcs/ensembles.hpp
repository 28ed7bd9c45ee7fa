#pragma once

#include "blpcs/keyrand.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace blpcs {

using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Positive per-column scale factors d_j. The associated diagonal matrix is
/// D = diag(1/d_1, ..., 1/d_M).
class ScalingDiag {
 public:
  ScalingDiag() = default;
  explicit ScalingDiag(std::vector<double> d);

  static ScalingDiag ones(std::size_t n) { return ScalingDiag(std::vector<double>(n, 1.0)); }

  std::size_t size() const { return d_.size(); }
  double operator[](std::size_t j) const { return d_[j]; }
  const std::vector<double>& values() const { return d_; }
  double max() const;
  double min() const;

 private:
  std::vector<double> d_;
};

/// d_j drawn as independent uniform integers in [1, dmax].
ScalingDiag random_integer_scaling(RandStream& stream, std::size_t n, int dmax);

enum class EnsembleKind { gaussian, bernoulli, antipodal_scaled };

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::gaussian;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::optional<ScalingDiag> scaling;  // required for antipodal_scaled
};

/// i.i.d. N(0,1) entries, drawn row by row. With `normalize_columns` every
/// column is rescaled to unit l2 norm.
DenseMatrix gaussian_matrix(RandStream& stream, std::size_t rows, std::size_t cols,
                            bool normalize_columns = false);
DenseMatrix bernoulli_matrix(RandStream& stream, std::size_t rows, std::size_t cols);
/// Column j takes the values +d_j / -d_j with equal probability.
DenseMatrix antipodal_scaled_matrix(RandStream& stream, std::size_t rows, std::size_t cols,
                                    const ScalingDiag& d);

/// Smallest mu with max_i |<a, e_i>| <= mu over the row distribution.
/// Gaussian rows are unbounded, so that kind is rejected.
double coherence_parameter(const EnsembleSpec& spec);
/// Condition number of Sigma = E[a a^T]^{1/2}.
double covariance_condition(const EnsembleSpec& spec);

/// mu * theta * omega^2 * k * ln(M), i.e. the RIPless sample requirement with
/// its unspecified constant set to one. Only meaningful for comparisons.
double ripless_sample_bound(double mu, double theta, double k, double M, double omega);

/// Monte-Carlo lower estimate of the restricted isometry constant delta_k:
/// the largest | ||A_T x||^2 / ||x||^2 - 1 | seen over `trials` random supports
/// T with |T| = k and Gaussian x restricted to T.
double rip_check_montecarlo(const DenseMatrix& A, std::size_t k, std::size_t trials,
                            RandStream& stream);

/// Applies blockdiag(A, ..., A) to vec(X) without forming it: column j of the
/// result is A * X.col(j).
DenseMatrix block_diagonal_apply(const DenseMatrix& A, const DenseMatrix& X);

// "BLPM" matrix file: magic, rows u32 LE, cols u32 LE, row-major f64 LE.
void write_matrix(std::ostream& out, const DenseMatrix& m);
DenseMatrix read_matrix(std::istream& in);
void save_matrix(const std::string& path, const DenseMatrix& m);
DenseMatrix load_matrix(const std::string& path);

}  // namespace blpcs
