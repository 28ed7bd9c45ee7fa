#include "blpcs/imaging.hpp"

#include "blpcs/errors.hpp"
#include "blpcs/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace blpcs {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

// Skips whitespace and '#' comments between PGM header tokens.
void skip_separators(std::istream& in) {
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string dummy;
      std::getline(in, dummy);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

long read_header_int(std::istream& in, const char* what) {
  skip_separators(in);
  long v = -1;
  if (!(in >> v) || v < 0) throw FormatError(std::string("PGM: bad ") + what);
  return v;
}

}  // namespace

GrayImage GrayImage::quantized() const {
  GrayImage out;
  out.pixels = pixels.unaryExpr([](double v) { return std::clamp(std::nearbyint(v), 0.0, 255.0); });
  return out;
}

GrayImage read_pgm(std::istream& in) {
  char magic[2];
  if (!in.read(magic, 2) || magic[0] != 'P' || magic[1] != '5') throw FormatError("PGM: expected binary P5");
  const long w = read_header_int(in, "width");
  const long h = read_header_int(in, "height");
  const long maxval = read_header_int(in, "maxval");
  if (maxval != 255) throw FormatError("PGM: maxval must be 255");
  if (w != h || w == 0) throw FormatError("PGM: image must be square");
  if (w % 2 != 0) throw FormatError("PGM: side length must be even");
  const int sep = in.get();
  if (sep != ' ' && sep != '\n' && sep != '\r' && sep != '\t') throw FormatError("PGM: bad header terminator");
  std::vector<unsigned char> bytes(static_cast<std::size_t>(w * h));
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size())))
    throw FormatError("PGM: truncated pixel data");
  GrayImage img;
  img.pixels.resize(h, w);
  for (long r = 0; r < h; ++r)
    for (long c = 0; c < w; ++c) img.pixels(r, c) = bytes[static_cast<std::size_t>(r * w + c)];
  return img;
}

void write_pgm(std::ostream& out, const GrayImage& image) {
  const auto n = image.n();
  if (n == 0 || n % 2 != 0 || image.pixels.cols() != image.pixels.rows())
    throw ShapeError("PGM: image must be square with an even side");
  out << "P5\n" << n << ' ' << n << "\n255\n";
  const GrayImage q = image.quantized();
  std::vector<unsigned char> bytes(n * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) bytes[r * n + c] = static_cast<unsigned char>(q.pixels(idx(r), idx(c)));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

GrayImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return read_pgm(in);
}

void save_pgm(const std::string& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  write_pgm(out, image);
  if (!out) throw FormatError("write failed: " + path);
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> column_sparsity(const DenseMatrix& X, double tol) {
  if (tol < 0.0) throw ShapeError("column_sparsity: tol must be non-negative");
  std::vector<std::size_t> k(static_cast<std::size_t>(X.cols()), 0);
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      if (std::abs(X(i, j)) > tol) ++k[static_cast<std::size_t>(j)];
  return k;
}

double hoeffding_threshold(std::size_t n, double level) {
  const double nd = static_cast<double>(n);
  return std::sqrt(std::log(nd / level) / (2.0 * nd));
}

PermutationStats acceptable_permutation_stats(const DenseMatrix& X, std::size_t trials, RandStream& stream,
                                              const std::vector<double>& t_grid) {
  if (X.rows() != X.cols() || X.rows() == 0) throw ShapeError("acceptable_permutation_stats: X must be square");
  const auto n = static_cast<std::size_t>(X.rows());
  const std::size_t N = n * n;
  std::vector<char> nz(N);
  for (std::size_t q = 0; q < N; ++q) nz[q] = X.data()[q] != 0.0;

  PermutationStats st;
  st.n = n;
  st.trials = trials;
  st.total_nonzeros = static_cast<std::size_t>(std::count(nz.begin(), nz.end(), 1));
  st.expected_column_sparsity = static_cast<double>(st.total_nonzeros) / static_cast<double>(n);
  const double avg_density = static_cast<double>(st.total_nonzeros) / static_cast<double>(N);

  std::vector<std::size_t> hits(t_grid.size(), 0);
  std::vector<std::size_t> counts(n);
  double sum0 = 0.0, sumsq0 = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const Permutation p = random_permutation(stream, N);
    std::fill(counts.begin(), counts.end(), 0);
    // Scrambled vec x'[i] = x[map[i]]; entry i sits in column i / n.
    for (std::size_t i = 0; i < N; ++i)
      if (nz[p[i]]) ++counts[i / n];
    const double kmax = static_cast<double>(*std::max_element(counts.begin(), counts.end()));
    const double deviation = kmax / static_cast<double>(n) - avg_density;
    for (std::size_t g = 0; g < t_grid.size(); ++g)
      if (deviation >= t_grid[g]) ++hits[g];
    const double k0 = static_cast<double>(counts[0]);
    sum0 += k0;
    sumsq0 += k0 * k0;
  }
  if (trials > 0) {
    const double T = static_cast<double>(trials);
    st.mean_first_column = sum0 / T;
    const double var = trials > 1 ? std::max(0.0, (sumsq0 - T * st.mean_first_column * st.mean_first_column) / (T - 1))
                                  : 0.0;
    st.stderr_first_column = std::sqrt(var / T);
  }
  for (std::size_t g = 0; g < t_grid.size(); ++g) {
    const double t = t_grid[g];
    st.tail.push_back({t, trials ? static_cast<double>(hits[g]) / static_cast<double>(trials) : 0.0,
                       static_cast<double>(n) * std::exp(-2.0 * static_cast<double>(n) * t * t)});
  }
  return st;
}

// ---------------------------------------------------------------------------

SolverConfig ImageDecodeConfig::default_image_solver() {
  SolverConfig c;
  c.method = SolverMethod::ista;
  c.max_iters = 400;
  c.accelerated = true;
  c.continuation = true;
  return c;
}

namespace {

DenseMatrix image_sensing(const BlpKey& key) {
  RandStream s(key.seed, "A");
  return gaussian_matrix(s, key.K(), key.M);
}

}  // namespace

ImageCipher::ImageCipher(const BlpKey& key)
    : key_(key),
      spec_(derive_basis_spec(key, BasisLayout::image2d)),
      basis_(build_secret_basis(spec_)),
      sensing_(image_sensing(key)) {}

DenseMatrix ImageCipher::coefficients(const DenseMatrix& X) const {
  const auto n = idx(key_.M);
  if (X.rows() != n || X.cols() != n) throw ShapeError("image size must match the key's M");
  const Vector s = basis_.analyze(Eigen::Map<const Vector>(X.data(), X.size()));
  return Eigen::Map<const DenseMatrix>(s.data(), n, n);
}

DenseMatrix ImageCipher::synthesize(const DenseMatrix& S) const {
  const auto n = idx(key_.M);
  if (S.rows() != n || S.cols() != n) throw ShapeError("coefficient size must match the key's M");
  const Vector x = basis_.synthesize(Eigen::Map<const Vector>(S.data(), S.size()));
  return Eigen::Map<const DenseMatrix>(x.data(), n, n);
}

DenseMatrix ImageCipher::encode_matrix(const DenseMatrix& X) const {
  return block_diagonal_apply(sensing_.matrix(), coefficients(X));
}

MeasurementSet ImageCipher::encode(const GrayImage& image) const {
  return MeasurementSet::from_matrix(encode_matrix(image.pixels));
}

DenseMatrix ImageCipher::decode_matrix(const MeasurementSet& packets, const ImageDecodeConfig& config) const {
  const std::size_t n = key_.M;
  if (packets.K != key_.K()) throw ShapeError("measurement K does not match the key");
  if (packets.blocks.size() != n) throw ShapeError("measurement block count must equal the image side");
  if (config.chunk == 0) throw ShapeError("decode chunk must be positive");
  DenseMatrix mask;
  const DenseMatrix Y = packets.dense(&mask);
  const bool complete = packets.complete();

  DenseMatrix S(idx(n), idx(n));
  const std::size_t chunks = (n + config.chunk - 1) / config.chunk;
  parallel_for(
      chunks,
      [&](std::size_t c) {
        const auto c0 = idx(c * config.chunk);
        const auto w = idx(std::min(config.chunk, n - c * config.chunk));
        const DenseMatrix Yc = Y.middleCols(c0, w);
        const DenseMatrix Mc = mask.middleCols(c0, w);
        const BatchRecovery r = ista_bpdn_batch(sensing_, Yc, complete ? nullptr : &Mc, config.solver);
        S.middleCols(c0, w) = r.estimates;
      },
      config.threads);
  return synthesize(S);
}

GrayImage ImageCipher::decode(const MeasurementSet& packets, const ImageDecodeConfig& config) const {
  GrayImage out;
  out.pixels = decode_matrix(packets, config).cwiseMax(0.0).cwiseMin(255.0);
  return out;
}

GrayImage bcs_in_decode(const BlpKey& key, const MeasurementSet& packets, const ImageDecodeConfig& config) {
  return ImageCipher(without_permutation(key)).decode(packets, config);
}

// ---------------------------------------------------------------------------

double psnr(const DenseMatrix& reference, const DenseMatrix& test) {
  if (reference.rows() != test.rows() || reference.cols() != test.cols()) throw ShapeError("psnr: size mismatch");
  const double e = (reference - test).squaredNorm();
  return apsnr({e}, static_cast<std::size_t>(reference.size()));
}

double apsnr(const std::vector<double>& error_energies, std::size_t pixels) {
  if (error_energies.empty()) throw ShapeError("apsnr: no trials");
  double mean = 0.0;
  for (double e : error_energies) {
    if (e == 0.0) return std::numeric_limits<double>::infinity();
    mean += static_cast<double>(pixels) * 255.0 * 255.0 / e;
  }
  mean /= static_cast<double>(error_energies.size());
  return 10.0 * std::log10(mean);
}

std::string format_db(double db) {
  if (std::isinf(db)) return db > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", db);
  return buf;
}

void validate(const ChannelModel& model) {
  if (!(model.noise_var >= 0.0)) throw ShapeError("channel: noise_var must be non-negative");
  if (!(model.plr >= 0.0 && model.plr < 1.0)) throw ShapeError("channel: plr must lie in [0, 1)");
}

MeasurementSet apply_channel(const MeasurementSet& packets, const ChannelModel& model, KeySeed seed,
                             const std::string& label) {
  validate(model);
  if (model.kind == ChannelKind::ideal) return packets;
  MeasurementSet out;
  out.K = packets.K;
  out.blocks.resize(packets.blocks.size());
  const double sigma = std::sqrt(model.noise_var);
  for (std::size_t j = 0; j < packets.blocks.size(); ++j) {
    RandStream s(seed, label + "/" + std::to_string(j));
    const auto& in = packets.blocks[j];
    auto& b = out.blocks[j];
    for (std::size_t i = 0; i < in.rows.size(); ++i) {
      if (model.kind == ChannelKind::awgn) {
        b.rows.push_back(in.rows[i]);
        b.values.push_back(in.values[i] + sigma * s.next_gaussian());
      } else if (s.next_uniform() >= model.plr) {
        b.rows.push_back(in.rows[i]);
        b.values.push_back(in.values[i]);
      }
    }
  }
  return out;
}

}  // namespace blpcs
