#include "blpcs/ensembles.hpp"

#include "blpcs/binary_io.hpp"
#include "blpcs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace blpcs {

ScalingDiag::ScalingDiag(std::vector<double> d) : d_(std::move(d)) {
  for (double v : d_)
    if (!(v > 0.0) || !std::isfinite(v)) throw ShapeError("scaling entries must be positive");
}

double ScalingDiag::max() const { return d_.empty() ? 0.0 : *std::max_element(d_.begin(), d_.end()); }
double ScalingDiag::min() const { return d_.empty() ? 0.0 : *std::min_element(d_.begin(), d_.end()); }

ScalingDiag random_integer_scaling(RandStream& stream, std::size_t n, int dmax) {
  if (dmax < 1) throw ShapeError("dmax must be at least 1");
  std::vector<double> d(n);
  for (auto& v : d) v = 1.0 + static_cast<double>(stream.next_below(static_cast<std::uint64_t>(dmax)));
  return ScalingDiag(std::move(d));
}

namespace {

void check_dims(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw ShapeError("matrix dimensions must be positive");
}

}  // namespace

DenseMatrix gaussian_matrix(RandStream& stream, std::size_t rows, std::size_t cols,
                            bool normalize_columns) {
  check_dims(rows, cols);
  DenseMatrix a(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = stream.next_gaussian();
  if (normalize_columns) a.colwise().normalize();
  return a;
}

DenseMatrix bernoulli_matrix(RandStream& stream, std::size_t rows, std::size_t cols) {
  return antipodal_scaled_matrix(stream, rows, cols, ScalingDiag::ones(cols));
}

DenseMatrix antipodal_scaled_matrix(RandStream& stream, std::size_t rows, std::size_t cols,
                                    const ScalingDiag& d) {
  check_dims(rows, cols);
  if (d.size() != cols) throw ShapeError("scaling length must equal the column count");
  DenseMatrix a(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double dj = d[static_cast<std::size_t>(j)];
      a(i, j) = (stream.next_u64() >> 63) ? dj : -dj;
    }
  }
  return a;
}

double coherence_parameter(const EnsembleSpec& spec) {
  switch (spec.kind) {
    case EnsembleKind::bernoulli:
      return 1.0;
    case EnsembleKind::antipodal_scaled:
      if (!spec.scaling) throw ShapeError("antipodal ensemble needs its scaling");
      return spec.scaling->max();
    case EnsembleKind::gaussian:
      break;
  }
  throw ShapeError("coherence parameter is unbounded for the Gaussian ensemble");
}

double covariance_condition(const EnsembleSpec& spec) {
  switch (spec.kind) {
    case EnsembleKind::gaussian:
    case EnsembleKind::bernoulli:
      return 1.0;
    case EnsembleKind::antipodal_scaled:
      if (!spec.scaling) throw ShapeError("antipodal ensemble needs its scaling");
      // E[a a^T] = diag(d_j^2), so Sigma = diag(d_j).
      return spec.scaling->max() / spec.scaling->min();
  }
  throw ShapeError("unsupported ensemble kind");
}

double ripless_sample_bound(double mu, double theta, double k, double M, double omega) {
  if (!(mu > 0 && theta > 0 && k > 0 && M > 0 && omega > 0))
    throw ShapeError("ripless_sample_bound arguments must be positive");
  return mu * theta * omega * omega * k * std::log(M);
}

double rip_check_montecarlo(const DenseMatrix& A, std::size_t k, std::size_t trials,
                            RandStream& stream) {
  const auto cols = static_cast<std::size_t>(A.cols());
  if (k == 0 || k > cols) throw ShapeError("rip check order must be in [1, cols]");
  std::vector<std::size_t> idx(cols);
  double worst = 0.0;
  Vector x(static_cast<Eigen::Index>(k));
  for (std::size_t t = 0; t < trials; ++t) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates: the first k entries become a uniform k-subset.
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + static_cast<std::size_t>(stream.next_below(cols - i));
      std::swap(idx[i], idx[j]);
    }
    for (auto& v : x) v = stream.next_gaussian();
    Vector ax = Vector::Zero(A.rows());
    for (std::size_t i = 0; i < k; ++i) ax += x[static_cast<Eigen::Index>(i)] * A.col(static_cast<Eigen::Index>(idx[i]));
    worst = std::max(worst, std::abs(ax.squaredNorm() / x.squaredNorm() - 1.0));
  }
  return worst;
}

DenseMatrix block_diagonal_apply(const DenseMatrix& A, const DenseMatrix& X) {
  if (A.cols() != X.rows()) throw ShapeError("block_diagonal_apply: A.cols must equal column length");
  return A * X;
}

void write_matrix(std::ostream& out, const DenseMatrix& m) {
  out.write("BLPM", 4);
  io::put_u32(out, static_cast<std::uint32_t>(m.rows()));
  io::put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) io::put_f64(out, m(i, j));
}

DenseMatrix read_matrix(std::istream& in) {
  io::expect_magic(in, "BLPM");
  const auto rows = io::get_u32(in);
  const auto cols = io::get_u32(in);
  if (rows == 0 || cols == 0) throw FormatError("BLPM: zero dimension");
  DenseMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = io::get_f64(in);
      if (!std::isfinite(m(i, j))) throw FormatError("BLPM: non-finite entry");
    }
  }
  return m;
}

void save_matrix(const std::string& path, const DenseMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  write_matrix(out, m);
}

DenseMatrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return read_matrix(in);
}

}  // namespace blpcs
