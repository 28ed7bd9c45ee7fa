#pragma once

#include "blpcs/bases.hpp"
#include "blpcs/ensembles.hpp"
#include "blpcs/keyrand.hpp"
#include "blpcs/solvers.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace blpcs {

using ComplexVector = Eigen::VectorXcd;

/// Seed plus the parameters from which the sensing matrix A_K and the secret
/// basis Psi_K are derived. Sub-streams: "A" (sensing matrix), "perm"
/// (coefficient scrambling), "scale" (d_j), "mix" (column mixes).
struct BlpKey {
  KeySeed seed;
  std::size_t M = 0;       // signal length, or image side in image mode
  double sr = 1.0;         // sampling rate K / M
  double alpha = 1.0;
  double beta = 1.0;
  int dmax = 1;            // d_j uniform integers in [1, dmax]; 1 disables scaling
  std::size_t mix_region = 0;  // side of the significant region (see significant_region_*)
  std::size_t mix_count = 0;
  bool scramble = true;    // false drops the permutation (the BCS-In model)

  /// round(sr * M), ties to even.
  std::size_t K() const;
  friend bool operator==(const BlpKey&, const BlpKey&) = default;
};

/// Validates ranges and fills mix_region with M / 8 when it is zero.
BlpKey keygen(std::uint64_t seed, std::size_t M, double sr, double alpha, double beta, int dmax,
              std::size_t mix_count, std::size_t mix_region = 0, bool scramble = true);
void validate(const BlpKey& key);
/// The same key with the permutation removed.
BlpKey without_permutation(BlpKey key);

/// Text form: one `name=value` line per field, LF endings. `scramble=0` is
/// written only for keys without a permutation.
std::string serialize_key(const BlpKey& key);
BlpKey parse_key(const std::string& text);
void save_key(const std::string& path, const BlpKey& key);
BlpKey load_key(const std::string& path);

/// Mix records drawn inside `region` (original coefficient indices), pairs
/// without replacement, a and b uniform in [0.5, 2] with random signs, then
/// moved to column positions of Psi_R P through `perm`.
std::vector<ColumnMix> sample_mixes(RandStream& stream, const IndexRegion& region, std::size_t count,
                                    const Permutation& perm);

/// Secret basis spec for a key in the given layout (dimension M or M*M).
/// In the image layout every column of the n x n coefficient matrix shares a
/// single scale factor d_j.
SecretBasisSpec derive_basis_spec(const BlpKey& key, BasisLayout layout);

/// 1D BLP-CS: y = A_K Psi_K^{-1} x with A_K a K x M Gaussian matrix.
class VectorCipher {
 public:
  explicit VectorCipher(const BlpKey& key);

  const BlpKey& key() const { return key_; }
  const SensingOperator& sensing() const { return sensing_; }
  const Basis& basis() const { return basis_; }
  const SecretBasisSpec& spec() const { return spec_; }

  Vector encode(const Vector& x) const;
  TwoStepResult decode(const Vector& y, const SolverConfig& config) const;
  /// Phi = A_K Psi_K^{-1}, refused above M = 4096.
  DenseMatrix equivalent_matrix() const;

 private:
  BlpKey key_;
  SecretBasisSpec spec_;
  Basis basis_;
  SensingOperator sensing_;
};

Vector blp_encode(const BlpKey& key, const Vector& x);
TwoStepResult blp_decode(const BlpKey& key, const Vector& y, const SolverConfig& config);

// --- measurement container ------------------------------------------------

/// Surviving measurements of one block (one image column, or one vector).
struct MeasurementPacket {
  std::vector<std::uint32_t> rows;  // ascending, < K
  std::vector<double> values;
};

struct MeasurementSet {
  std::uint32_t K = 0;
  std::vector<MeasurementPacket> blocks;

  /// Every row of every column of Y survives.
  static MeasurementSet from_matrix(const DenseMatrix& Y);
  /// K x blocks matrix with zeros at lost rows; `mask` (optional) gets 1/0.
  DenseMatrix dense(DenseMatrix* mask = nullptr) const;
  bool complete() const;
  std::size_t surviving() const;
};

// "BLPY": magic, u32 block count, u32 K, then per block u32 count followed
// by (u32 row, f64 value) pairs. All little-endian.
void write_measurements(std::ostream& out, const MeasurementSet& set);
MeasurementSet read_measurements(std::istream& in);
void save_measurements(const std::string& path, const MeasurementSet& set);
MeasurementSet load_measurements(const std::string& path);

// --- baseline product ciphers (insecure; attack targets) -------------------

/// Class I: y = P_K Phi_K x.
Vector scramble_measurements_encode(const DenseMatrix& phi, const Permutation& pk, const Vector& x);
/// Class II: y = Phi_K P_M Psi^{-1} x.
Vector scramble_frequency_encode(const DenseMatrix& phi, const Permutation& pm, const Basis& basis,
                                 const Vector& x);

/// Two m x m unit-modulus phase masks exp(j 2 pi p) and exp(j 2 pi q).
struct DrpeMasks {
  Eigen::MatrixXcd p;
  Eigen::MatrixXcd q;

  std::size_t m() const { return static_cast<std::size_t>(p.rows()); }
  /// p and q uniform in [0, 1).
  static DrpeMasks random(RandStream& stream, std::size_t m);
  static DrpeMasks trivial(std::size_t m);
};

/// Unitary m-point DFT matrix, F(u, v) = exp(-j 2 pi u v / m) / sqrt(m).
Eigen::MatrixXcd dft_matrix(std::size_t m);
/// T = Fbar^* Qbar Fbar Pbar with Fbar = F kron F acting on column-major vec.
/// Refused for m > 32.
Eigen::MatrixXcd drpe_transfer_matrix(const DrpeMasks& masks);
/// C = IF(FT(Y .* P) .* Q) on an m x m field.
Eigen::MatrixXcd drpe_apply(const DrpeMasks& masks, const Eigen::MatrixXcd& Y);
/// vec(C) for Y = reshape(Phi x) with Phi having m^2 rows.
ComplexVector drpe_cs_encode(const DenseMatrix& phi, const DrpeMasks& masks, const Vector& x);

/// (re0, im0, re1, im1, ...).
Vector interleave(const ComplexVector& v);
ComplexVector deinterleave(const Vector& v);

}  // namespace blpcs
