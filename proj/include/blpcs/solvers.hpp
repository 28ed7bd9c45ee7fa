#pragma once

#include "blpcs/bases.hpp"
#include "blpcs/ensembles.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace blpcs {

/// Support-indexed coefficient vector. Support indices are ascending.
struct SparseRep {
  std::size_t length = 0;
  std::vector<std::size_t> support;
  std::vector<double> values;

  std::size_t nnz() const { return support.size(); }
  Vector dense() const;
  /// Entries with |v| > tol.
  static SparseRep from_dense(const Vector& v, double tol = 0.0);
};

enum class SolverMethod { omp, ista };

struct SolverConfig {
  SolverMethod method = SolverMethod::ista;
  int max_iters = 400;
  /// ISTA: stop once the relative objective change falls below this (after
  /// continuation has reached its final lambda). OMP: stop once
  /// ||r|| <= residual_tol * ||y||.
  double residual_tol = 1e-10;
  /// Fixed shrinkage weight; ignored when continuation is on.
  double lambda = 0.0;
  bool continuation = true;
  /// Continuation runs geometrically from start_frac * ||A^T y||_inf down to
  /// end_frac * ||A^T y||_inf over the first `continuation_share` of the
  /// iterations, then holds. A fully observed system with at least as many
  /// rows as columns and full rank is then solved directly instead.
  double lambda_start_frac = 0.1;
  double lambda_end_frac = 1e-3;
  double continuation_share = 0.8;
  /// Monotone FISTA extrapolation on top of the proximal-gradient step.
  bool accelerated = false;
  /// Least-squares refit on the detected support after ISTA.
  bool debias = false;
  double debias_threshold = 1e-3;  // relative to the largest |coefficient|
  /// OMP sparsity budget; 0 means rows(A).
  std::size_t sparsity_budget = 0;
};

struct RecoveryReport {
  Vector estimate;
  double residual_l2 = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string note;
};

/// A sensing matrix together with lazily computed, thread-safe derived data:
/// column norms, the Lipschitz constant of s -> A^T A s, and a rank-revealing
/// factorization for least-squares and square-system solves. Sharing one
/// operator across many decodes reuses all of it.
class SensingOperator {
 public:
  explicit SensingOperator(DenseMatrix a);
  explicit SensingOperator(std::shared_ptr<const DenseMatrix> a);

  const DenseMatrix& matrix() const { return *a_; }
  Eigen::Index rows() const { return a_->rows(); }
  Eigen::Index cols() const { return a_->cols(); }

  const Vector& column_norms() const;
  /// 1.1 x the 30-step power-iteration estimate of ||A||_2^2.
  double lipschitz() const;
  double spectral_norm_estimate() const;
  /// Column-pivoted QR of A, used when the system is not underdetermined.
  const Eigen::ColPivHouseholderQR<DenseMatrix>& qr() const;

 private:
  struct Cache;
  std::shared_ptr<const DenseMatrix> a_;
  std::shared_ptr<Cache> cache_;
};

/// Orthogonal matching pursuit with normalized-correlation selection and an
/// exact least-squares refit on the active set after every pick.
RecoveryReport omp_recover(const SensingOperator& A, const Vector& y, std::size_t sparsity_budget,
                           const SolverConfig& config = {});
RecoveryReport omp_recover(const DenseMatrix& A, const Vector& y, std::size_t sparsity_budget,
                           const SolverConfig& config = {});

/// l1-regularized least squares, 0.5 ||y - A s||^2 + lambda ||s||_1, by
/// proximal gradient with step 1/L. When `objective_trace` is given it
/// receives the objective after every iteration.
RecoveryReport ista_bpdn(const SensingOperator& A, const Vector& y, const SolverConfig& config,
                         std::vector<double>* objective_trace = nullptr);
RecoveryReport ista_bpdn(const DenseMatrix& A, const Vector& y, const SolverConfig& config,
                         std::vector<double>* objective_trace = nullptr);

/// Column-batched ISTA: column j of Y is solved independently against the
/// rows of A selected by column j of `mask` (1 = observed, 0 = missing).
/// With `l1_weights` the penalty becomes sum_i w_ij |s_ij| (weights > 0).
/// Each column's result depends only on that column's data.
struct BatchRecovery {
  DenseMatrix estimates;
  std::vector<double> residual_l2;
  int iterations = 0;
  bool converged = false;
};
BatchRecovery ista_bpdn_batch(const SensingOperator& A, const DenseMatrix& Y, const DenseMatrix* mask,
                              const SolverConfig& config, const DenseMatrix* l1_weights = nullptr);

struct L0Result {
  SparseRep solution;
  double residual_l2 = 0.0;
  /// Best residual among fits whose effective support differs from the winner.
  double runner_up_residual = 0.0;
  std::size_t supports_tried = 0;
};

/// Exhaustive search over every support of size <= k with a least-squares
/// fit per support. Refuses when more than 1e6 supports would be visited.
L0Result l0_bruteforce(const DenseMatrix& A, const Vector& y, std::size_t k);

struct TwoStepResult {
  Vector x;
  RecoveryReport coefficients;
};

/// Solve for sparse s with y = A_K s, then return x = Psi_K s.
TwoStepResult two_step_decode(const SensingOperator& A_K, const Basis& basis, const Vector& y,
                              const SolverConfig& config);

double relative_error(const Vector& estimate, const Vector& truth);

}  // namespace blpcs
