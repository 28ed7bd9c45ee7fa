#include "blpcs/attacks.hpp"

#include "blpcs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace blpcs {

AttackReport cpa_recover_matrix(const EncryptionOracle& oracle, RandStream& stream, std::size_t verify_inputs) {
  const std::size_t M = oracle.input_length;
  if (M == 0 || !oracle.encode) throw ShapeError("cpa_recover_matrix: empty oracle");
  AttackReport rep;
  for (std::size_t j = 0; j < M; ++j) {
    Vector e = Vector::Zero(static_cast<Eigen::Index>(M));
    e[static_cast<Eigen::Index>(j)] = 1.0;
    const Vector col = oracle.encode(e);
    if (j == 0) rep.recovered_matrix.resize(col.size(), static_cast<Eigen::Index>(M));
    if (col.size() != rep.recovered_matrix.rows()) throw GuardError("cpa_recover_matrix: ciphertext length varies");
    rep.recovered_matrix.col(static_cast<Eigen::Index>(j)) = col;
    ++rep.queries_used;
  }
  for (std::size_t t = 0; t < verify_inputs; ++t) {
    Vector x(static_cast<Eigen::Index>(M));
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = stream.next_gaussian();
    const Vector got = oracle.encode(x);
    const Vector want = rep.recovered_matrix * x;
    const double err = (got - want).norm() / std::max(got.norm(), 1e-300);
    rep.verification_error = std::max(rep.verification_error, err);
  }
  if (rep.verification_error > 1e-9)
    throw GuardError("cpa_recover_matrix: oracle is not linear (mismatch " + std::to_string(rep.verification_error) +
                     ")");
  return rep;
}

TwoStepResult cpa_break_and_decode(const DenseMatrix& recovered, const Vector& c, const Basis& public_basis,
                                   const SolverConfig& config) {
  if (static_cast<std::size_t>(recovered.cols()) != public_basis.dim())
    throw ShapeError("cpa_break_and_decode: basis size must equal cols(recovered)");
  const SensingOperator op(recovered * public_basis.synthesis_matrix());
  return two_step_decode(op, public_basis, c, config);
}

AttackReport wrong_key_recovery_demo(const DenseMatrix& A, const DenseMatrix& A_wrong, const Vector& y,
                                     const std::optional<Vector>& truth) {
  if (A.rows() != A_wrong.rows() || A.cols() != A_wrong.cols()) throw ShapeError("wrong_key_recovery_demo: shapes");
  SolverConfig cfg;
  cfg.method = SolverMethod::omp;
  cfg.residual_tol = 1e-12;
  const RecoveryReport r = omp_recover(A_wrong, y, static_cast<std::size_t>(A_wrong.rows()), cfg);
  AttackReport rep;
  rep.recovered_matrix = r.estimate;
  rep.queries_used = 0;
  rep.verification_error = r.residual_l2;
  if (truth) {
    rep.reconstruction_error = relative_error(r.estimate, *truth);
    rep.break_success = rep.reconstruction_error < kBreakThreshold;
  }
  return rep;
}

bool decomposition_ambiguity_check(const DenseMatrix& E, const DenseMatrix& F, std::size_t trials,
                                   RandStream& stream) {
  if (E.cols() != F.rows()) throw ShapeError("decomposition_ambiguity_check: E and F do not compose");
  const DenseMatrix EF = E * F;
  const double scale = std::max(1.0, EF.cwiseAbs().maxCoeff());
  for (std::size_t t = 0; t < trials; ++t) {
    const Permutation p = random_permutation(stream, static_cast<std::size_t>(E.cols()));
    const DenseMatrix P = p.to_matrix();
    const DenseMatrix EP = E * P;
    if ((EF - EP * (P.transpose() * F)).cwiseAbs().maxCoeff() > 1e-10 * scale) return false;
    for (Eigen::Index r = 0; r < E.rows(); ++r) {
      std::vector<double> a(E.row(r).begin(), E.row(r).end()), b(EP.row(r).begin(), EP.row(r).end());
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      if (a != b) return false;
    }
  }
  return true;
}

DenseMatrix bernoulli_single_query_attack(const EncryptionOracle& oracle) {
  const std::size_t M = oracle.input_length;
  if (M == 0 || M > 50) throw GuardError("bernoulli_single_query_attack: supports 1 <= M <= 50");
  Vector x(static_cast<Eigen::Index>(M));
  for (std::size_t j = 0; j < M; ++j) x[static_cast<Eigen::Index>(j)] = std::ldexp(1.0, static_cast<int>(j));
  const Vector y = oracle.encode(x);
  // y_i = 2 * sum_j b_ij 2^j - (2^M - 1) with b = (a + 1) / 2 in {0, 1}.
  const std::int64_t offset = (std::int64_t{1} << M) - 1;
  DenseMatrix A(y.size(), static_cast<Eigen::Index>(M));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double yi = y[i];
    if (yi != std::nearbyint(yi) || std::abs(yi) > std::ldexp(1.0, 52))
      throw GuardError("bernoulli_single_query_attack: ciphertext is not an exact integer");
    const std::int64_t twice = static_cast<std::int64_t>(yi) + offset;
    if (twice < 0 || twice % 2 != 0 || (twice / 2) > offset)
      throw GuardError("bernoulli_single_query_attack: ciphertext inconsistent with a +-1 matrix");
    const std::uint64_t bits = static_cast<std::uint64_t>(twice / 2);
    for (std::size_t j = 0; j < M; ++j) A(i, static_cast<Eigen::Index>(j)) = ((bits >> j) & 1U) ? 1.0 : -1.0;
  }
  return A;
}

std::vector<std::pair<double, double>> distance_pairs(const EncryptionOracle& oracle, std::size_t pairs,
                                                      RandStream& stream) {
  std::vector<std::pair<double, double>> out;
  out.reserve(pairs);
  const auto M = static_cast<Eigen::Index>(oracle.input_length);
  for (std::size_t p = 0; p < pairs; ++p) {
    Vector x1(M), x2(M);
    for (Eigen::Index i = 0; i < M; ++i) x1[i] = stream.next_gaussian();
    const double spread = stream.next_uniform();
    for (Eigen::Index i = 0; i < M; ++i) x2[i] = x1[i] + spread * stream.next_gaussian();
    out.emplace_back((x1 - x2).norm(), (oracle.encode(x1) - oracle.encode(x2)).norm());
  }
  return out;
}

}  // namespace blpcs
