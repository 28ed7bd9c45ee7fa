#pragma once

#include "blpcs/cipher.hpp"
#include "blpcs/ensembles.hpp"
#include "blpcs/keyrand.hpp"
#include "blpcs/solvers.hpp"

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace blpcs {

/// Square 8-bit grayscale image with an even side. pixels(r, c) is row r,
/// column c; vec() stacks columns.
struct GrayImage {
  DenseMatrix pixels;

  std::size_t n() const { return static_cast<std::size_t>(pixels.rows()); }
  /// Rounded and clamped to [0, 255].
  GrayImage quantized() const;
};

/// Binary P5 with maxval 255 and equal, even width and height.
GrayImage read_pgm(std::istream& in);
void write_pgm(std::ostream& out, const GrayImage& image);
GrayImage load_pgm(const std::string& path);
void save_pgm(const std::string& path, const GrayImage& image);

/// Number of entries with |X(i, j)| > tol in each column.
std::vector<std::size_t> column_sparsity(const DenseMatrix& X, double tol = 0.0);

struct TailRow {
  double t = 0.0;
  double empirical = 0.0;  // fraction of trials with deviation >= t
  double reference = 0.0;  // n exp(-2 n t^2)
};

/// Scrambling statistics for a sparse n x n matrix. The deviation of one
/// scramble is max_j k_j / n - ||k||_1 / n^2, the largest column density
/// above the average density.
struct PermutationStats {
  std::size_t n = 0;
  std::size_t total_nonzeros = 0;
  std::size_t trials = 0;
  double expected_column_sparsity = 0.0;  // ||k||_1 / n
  double mean_first_column = 0.0;         // average k_0 over trials
  double stderr_first_column = 0.0;       // its standard error
  std::vector<TailRow> tail;
};

/// t with n exp(-2 n t^2) = level.
double hoeffding_threshold(std::size_t n, double level);

PermutationStats acceptable_permutation_stats(const DenseMatrix& X, std::size_t trials, RandStream& stream,
                                              const std::vector<double>& t_grid);

struct ImageDecodeConfig {
  SolverConfig solver = default_image_solver();
  /// Columns per batched solve. Fixed chunking keeps results independent of
  /// the worker count.
  std::size_t chunk = 32;
  std::size_t threads = 0;

  static SolverConfig default_image_solver();
};

/// Column-wise BLP-CS for n x n images: S = Psi_K^{-1} vec(X) reshaped to
/// n x n, then Y = A S with one K x n Gaussian A shared by every column.
class ImageCipher {
 public:
  explicit ImageCipher(const BlpKey& key);

  const BlpKey& key() const { return key_; }
  const Basis& basis() const { return basis_; }
  const SecretBasisSpec& spec() const { return spec_; }
  const SensingOperator& sensing() const { return sensing_; }

  /// Secret-domain coefficients as an n x n matrix (column j = s_j).
  DenseMatrix coefficients(const DenseMatrix& X) const;
  DenseMatrix synthesize(const DenseMatrix& S) const;

  DenseMatrix encode_matrix(const DenseMatrix& X) const;
  MeasurementSet encode(const GrayImage& image) const;

  /// Unclamped reconstruction; lost rows are dropped column by column.
  DenseMatrix decode_matrix(const MeasurementSet& packets, const ImageDecodeConfig& config = {}) const;
  GrayImage decode(const MeasurementSet& packets, const ImageDecodeConfig& config = {}) const;

 private:
  BlpKey key_;
  SecretBasisSpec spec_;
  Basis basis_;
  SensingOperator sensing_;
};

/// Same pipeline with the permutation removed.
GrayImage bcs_in_decode(const BlpKey& key, const MeasurementSet& packets, const ImageDecodeConfig& config = {});

/// 10 log10(M 255^2 / ||x - xbar||^2); +infinity for identical inputs.
double psnr(const DenseMatrix& reference, const DenseMatrix& test);
/// Error energies of repeated trials -> 10 log10(mean(M 255^2 / e)).
double apsnr(const std::vector<double>& error_energies, std::size_t pixels);
/// "inf" for the identical-image sentinel, fixed two decimals otherwise.
std::string format_db(double db);

enum class ChannelKind { ideal, awgn, packet_loss };

struct ChannelModel {
  ChannelKind kind = ChannelKind::ideal;
  double noise_var = 1.0;
  double plr = 0.0;
};

void validate(const ChannelModel& model);
/// Block j draws from the stream (seed, label + "/" + j), so the outcome does
/// not depend on processing order.
MeasurementSet apply_channel(const MeasurementSet& packets, const ChannelModel& model, KeySeed seed,
                             const std::string& label = "channel");

}  // namespace blpcs
