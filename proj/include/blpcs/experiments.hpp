#pragma once

#include "blpcs/imaging.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace blpcs {

// --- non-RIP antipodal example ---------------------------------------------

struct Fig1Config {
  std::size_t M = 500;
  std::size_t k = 10;
  std::size_t K = 60;
  int dmax = 60;
  std::size_t seeds = 100;
  std::uint64_t seed_base = 1;
};

struct Fig1Row {
  std::uint64_t seed = 0;
  double two_step_error = 0.0;  // relative l2 error of the RIP-side decode
  double direct_error = 0.0;    // relative l2 error of l1 directly on Phi
  double mu = 0.0;
  double theta = 0.0;
  double ripless_bound = 0.0;
};

/// Per seed: x in {0,1}^M with k ones, Phi antipodal with d_j in [1, dmax],
/// y = Phi x. Two-step: OMP on the Bernoulli matrix Phi diag(1/d), then
/// x = s / d. Direct: l1 on Phi.
std::vector<Fig1Row> run_fig1(const Fig1Config& config);
void write_fig1_csv(std::ostream& out, const std::vector<Fig1Row>& rows);

// --- best s-term study ------------------------------------------------------

struct StermConfig {
  std::vector<double> alphas{0.92, 0.95, 0.99, 1.0};
  std::vector<double> betas{0.92, 0.95, 0.99, 1.0};
  std::vector<double> keep_fractions{0.05, 0.1, 0.2};
};

struct StermRow {
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t s = 0;
  double psnr_rpfrct = 0.0;
  double psnr_dct2 = 0.0;
  double ratio = 0.0;
};

/// The DCT2 reference is the 2D DCT applied to each n/2 x n/2 quadrant,
/// which RPFrCT reproduces exactly at alpha = beta = 1.
std::vector<StermRow> run_sterm(const DenseMatrix& image, const StermConfig& config);
void write_sterm_csv(std::ostream& out, const std::vector<StermRow>& rows);
DenseMatrix center_crop(const DenseMatrix& image, std::size_t side);

// --- image tables -----------------------------------------------------------

enum class ImageModel { blp, bcs_in };

struct ImageCell {
  double sr = 0.3;
  ImageModel model = ImageModel::blp;
  ChannelModel channel;
};

struct ImageExperimentConfig {
  std::string image_name = "image";
  double alpha = 0.99;
  double beta = 0.95;
  int dmax = 60;
  std::size_t mix_count = 16;
  std::size_t trials = 10;
  std::uint64_t seed_base = 1;
  bool record_time = false;  // seconds column stays 0 otherwise, keeping CSV bytes reproducible
  ImageDecodeConfig decode;
};

struct ImageRow {
  std::string image;
  double sr = 0.0;
  ImageModel model = ImageModel::blp;
  ChannelModel channel;
  double apsnr_db = 0.0;
  double seconds = 0.0;
};

/// Trial t uses key seed seed_base + t for every cell, so BLP-CS and BCS-In
/// see the same sensing matrix, scaling and mixes.
std::vector<ImageRow> run_image_cells(const GrayImage& image, const std::vector<ImageCell>& cells,
                                      const ImageExperimentConfig& config);
std::vector<ImageCell> table1_cells(const std::vector<double>& srs);
std::vector<ImageCell> table2_cells(const std::vector<double>& srs, const std::vector<double>& plrs,
                                    double noise_var = 1.0);
void write_image_csv(std::ostream& out, const std::vector<ImageRow>& rows);
std::string model_name(ImageModel m);
std::string channel_name(ChannelKind k);

// --- attack demos -----------------------------------------------------------

struct AttackExperimentConfig {
  std::size_t seeds = 20;
  std::uint64_t seed_base = 1;
  std::size_t M = 256, K = 64, k = 8;      // class I / II / BLP-CS
  std::size_t drpe_m = 4, drpe_M = 32, drpe_k = 2;
  std::size_t wk_M = 500, wk_K = 60, wk_k = 10;  // wrong-key demo
  int dmax = 60;
  bool include_informed = true;            // BLP-CS attacked with the exact R_alpha
};

struct AttackRow {
  std::string target;
  std::uint64_t seed = 0;
  std::size_t M = 0, K = 0, k = 0, queries = 0;
  bool break_success = false;
  double rel_error = 0.0;
  double residual = 0.0;  // wrong-key rows: ||y - A' x'||
};

/// Targets: class1, class2, drpe, blp (identical public-DCT attack),
/// blp_known_rpfrct (attacker also knows R_alpha) and wrong_key.
std::vector<AttackRow> run_attacks(const AttackExperimentConfig& config);
void write_attack_csv(std::ostream& out, const std::vector<AttackRow>& rows);
SolverConfig attack_solver();

}  // namespace blpcs
