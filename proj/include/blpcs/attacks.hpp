#pragma once

#include "blpcs/bases.hpp"
#include "blpcs/cipher.hpp"
#include "blpcs/solvers.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace blpcs {

/// Black-box encryption under a fixed key. Complex ciphertexts are presented
/// interleaved (see interleave()).
struct EncryptionOracle {
  std::function<Vector(const Vector&)> encode;
  std::size_t input_length = 0;
};

struct AttackReport {
  DenseMatrix recovered_matrix;
  std::size_t queries_used = 0;
  bool break_success = false;
  double reconstruction_error = 0.0;
  /// Largest relative mismatch between the oracle and the recovered matrix on
  /// fresh random inputs.
  double verification_error = 0.0;
};

/// Relative error below which a decode counts as a break.
inline constexpr double kBreakThreshold = 1e-3;

/// Column j of the equivalent matrix is oracle(e_j). Afterwards the oracle
/// is queried on `verify_inputs` random vectors; a mismatch above 1e-9
/// (relative) means the cipher is not linear and raises GuardError.
AttackReport cpa_recover_matrix(const EncryptionOracle& oracle, RandStream& stream, std::size_t verify_inputs = 2);

/// Single-step l1 decode with a recovered matrix: find sparse s with
/// c = (recovered * Psi) s and return x = Psi s.
TwoStepResult cpa_break_and_decode(const DenseMatrix& recovered, const Vector& c, const Basis& public_basis,
                                   const SolverConfig& config);

/// Decodes y with a wrong Gaussian matrix by running orthogonal matching
/// pursuit for rows(A_wrong) steps, which yields a K-sparse exact fit. When
/// `truth` is given, reconstruction_error is the relative error against it.
AttackReport wrong_key_recovery_demo(const DenseMatrix& A, const DenseMatrix& A_wrong, const Vector& y,
                                     const std::optional<Vector>& truth = std::nullopt);

/// Checks EF = (EP)(P^T F) and that each row of EP is a rearrangement of the
/// same row of E, over `trials` random permutations.
bool decomposition_ambiguity_check(const DenseMatrix& E, const DenseMatrix& F, std::size_t trials,
                                   RandStream& stream);

/// Recovers a +-1 matrix from the single plaintext (2^0, ..., 2^{M-1}). Exact
/// integer arithmetic limits M to 50.
DenseMatrix bernoulli_single_query_attack(const EncryptionOracle& oracle);

/// (||x1 - x2||, ||y1 - y2||) for random plaintext pairs under one oracle.
std::vector<std::pair<double, double>> distance_pairs(const EncryptionOracle& oracle, std::size_t pairs,
                                                      RandStream& stream);

}  // namespace blpcs
