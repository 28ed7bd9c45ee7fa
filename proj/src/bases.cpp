#include "blpcs/bases.hpp"

#include "blpcs/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>

namespace blpcs {

namespace {

constexpr std::size_t kMaxDense = 4096;

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

void require_dim(const Vector& v, std::size_t dim, const char* what) {
  if (static_cast<std::size_t>(v.size()) != dim) throw ShapeError(std::string(what) + ": length mismatch");
}

}  // namespace

DenseMatrix dct_matrix(std::size_t n) {
  if (n == 0) throw ShapeError("dct_matrix: n must be positive");
  DenseMatrix c(idx(n), idx(n));
  const double nd = static_cast<double>(n);
  for (std::size_t l = 0; l < n; ++l) {
    const double eps = l == 0 ? 1.0 : std::numbers::sqrt2;
    for (std::size_t i = 0; i < n; ++i) {
      c(idx(l), idx(i)) = eps / std::sqrt(nd) *
                          std::cos(2.0 * std::numbers::pi * static_cast<double>((2 * i + 1) * l) / (4.0 * nd));
    }
  }
  return c;
}

namespace {

EigenSystem compute_dct_eigensystem(std::size_t n) {
  const DenseMatrix c = dct_matrix(n);
  Eigen::ComplexSchur<ComplexMatrix> schur(c.cast<std::complex<double>>());
  if (schur.info() != Eigen::Success) throw GuardError("complex Schur factorization of the DCT failed");
  const ComplexMatrix& t = schur.matrixT();
  const ComplexMatrix& u = schur.matrixU();

  std::vector<double> phis(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::complex<double> lambda = t(idx(i), idx(i));
    double phi = std::arg(lambda);
    // Snap the negative real axis onto +pi so the branch is single-valued.
    if (std::abs(lambda + 1.0) < 1e-9) phi = std::numbers::pi;
    phis[i] = phi;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return phis[a] < phis[b]; });

  EigenSystem eig;
  eig.U.resize(idx(n), idx(n));
  eig.phis.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    eig.U.col(idx(i)) = u.col(idx(order[i]));
    eig.phis[i] = phis[order[i]];
  }
  eig.reconstruction_error = (fractional_power(eig, 1.0).real() - c).cwiseAbs().maxCoeff();
  if (eig.reconstruction_error > 1e-9)
    throw GuardError("DCT eigendecomposition residual too large: " + std::to_string(eig.reconstruction_error));
  return eig;
}

}  // namespace

const EigenSystem& dct_eigensystem(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::unique_ptr<EigenSystem>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<EigenSystem>(compute_dct_eigensystem(n));
  return *slot;
}

ComplexMatrix fractional_power(const EigenSystem& eig, double alpha) {
  const Eigen::Index n = eig.U.cols();
  Eigen::VectorXcd lam(n);
  for (Eigen::Index i = 0; i < n; ++i) lam[i] = std::polar(1.0, alpha * eig.phis[static_cast<std::size_t>(i)]);
  return eig.U * lam.asDiagonal() * eig.U.adjoint();
}

ComplexMatrix dfrct_matrix(std::size_t n, double alpha) {
  if (n == 0) throw ShapeError("dfrct_matrix: n must be positive");
  return fractional_power(dct_eigensystem(n), alpha);
}

DenseMatrix rpfrct_matrix(std::size_t M, double alpha) {
  if (M < 2 || M % 2 != 0) throw ShapeError("rpfrct_matrix: M must be even and at least 2");
  const std::size_t h = M / 2;
  const ComplexMatrix b = dfrct_matrix(h, alpha);
  DenseMatrix r(idx(M), idx(M));
  const auto H = idx(h);
  r.topLeftCorner(H, H) = b.real();
  r.topRightCorner(H, H) = -b.imag();
  r.bottomLeftCorner(H, H) = b.imag();
  r.bottomRightCorner(H, H) = b.real();
  return r;
}

DenseMatrix rpfrct2d_forward(const DenseMatrix& X, const DenseMatrix& r_alpha, const DenseMatrix& r_beta) {
  if (X.rows() != r_alpha.cols() || X.cols() != r_beta.cols())
    throw ShapeError("rpfrct2d_forward: shape mismatch");
  return r_alpha * X * r_beta.transpose();
}

DenseMatrix rpfrct2d_inverse(const DenseMatrix& S, const DenseMatrix& r_alpha, const DenseMatrix& r_beta) {
  if (S.rows() != r_alpha.rows() || S.cols() != r_beta.rows())
    throw ShapeError("rpfrct2d_inverse: shape mismatch");
  return r_alpha.transpose() * S * r_beta;
}

DenseMatrix rpfrct2d_forward(const DenseMatrix& X, double alpha, double beta) {
  if (X.rows() != X.cols()) throw ShapeError("rpfrct2d_forward: square input expected");
  const auto n = static_cast<std::size_t>(X.rows());
  return rpfrct2d_forward(X, rpfrct_matrix(n, alpha), rpfrct_matrix(n, beta));
}

DenseMatrix rpfrct2d_inverse(const DenseMatrix& S, double alpha, double beta) {
  if (S.rows() != S.cols()) throw ShapeError("rpfrct2d_inverse: square input expected");
  const auto n = static_cast<std::size_t>(S.rows());
  return rpfrct2d_inverse(S, rpfrct_matrix(n, alpha), rpfrct_matrix(n, beta));
}

// ---------------------------------------------------------------------------

Basis::Basis(std::size_t dim, Map synthesize, Map analyze)
    : dim_(dim), synthesize_(std::move(synthesize)), analyze_(std::move(analyze)) {}

Vector Basis::synthesize(const Vector& s) const {
  require_dim(s, dim_, "Basis::synthesize");
  return synthesize_(s);
}

Vector Basis::analyze(const Vector& x) const {
  require_dim(x, dim_, "Basis::analyze");
  return analyze_(x);
}

DenseMatrix Basis::synthesis_matrix() const {
  if (dim_ > kMaxDense) throw GuardError("basis too large to materialize");
  DenseMatrix m(idx(dim_), idx(dim_));
  for (std::size_t j = 0; j < dim_; ++j) m.col(idx(j)) = synthesize(Vector::Unit(idx(dim_), idx(j)));
  return m;
}

DenseMatrix Basis::analysis_matrix() const {
  if (dim_ > kMaxDense) throw GuardError("basis too large to materialize");
  DenseMatrix m(idx(dim_), idx(dim_));
  for (std::size_t j = 0; j < dim_; ++j) m.col(idx(j)) = analyze(Vector::Unit(idx(dim_), idx(j)));
  return m;
}

Basis identity_basis(std::size_t n) {
  auto id = [](const Vector& v) { return v; };
  return Basis(n, id, id);
}

Basis orthonormal_basis(DenseMatrix psi) {
  if (psi.rows() != psi.cols()) throw ShapeError("orthonormal_basis: square matrix expected");
  auto shared = std::make_shared<const DenseMatrix>(std::move(psi));
  return Basis(
      static_cast<std::size_t>(shared->rows()), [shared](const Vector& s) -> Vector { return *shared * s; },
      [shared](const Vector& x) -> Vector { return shared->transpose() * x; });
}

Basis dct_basis(std::size_t n) { return orthonormal_basis(dct_matrix(n).transpose()); }

Basis rpfrct_basis(std::size_t M, double alpha) { return orthonormal_basis(rpfrct_matrix(M, alpha).transpose()); }

Basis rpfrct2d_basis(std::size_t n, double alpha, double beta) {
  auto ra = std::make_shared<const DenseMatrix>(rpfrct_matrix(n, alpha));
  auto rb = std::make_shared<const DenseMatrix>(rpfrct_matrix(n, beta));
  const auto N = idx(n);
  auto synth = [ra, rb, N](const Vector& s) -> Vector {
    Eigen::Map<const DenseMatrix> S(s.data(), N, N);
    DenseMatrix X = ra->transpose() * S * *rb;
    return Eigen::Map<const Vector>(X.data(), N * N);
  };
  auto analyze = [ra, rb, N](const Vector& x) -> Vector {
    Eigen::Map<const DenseMatrix> X(x.data(), N, N);
    DenseMatrix S = *ra * X * rb->transpose();
    return Eigen::Map<const Vector>(S.data(), N * N);
  };
  return Basis(n * n, synth, analyze);
}

// ---------------------------------------------------------------------------

IndexRegion IndexRegion::from_indices(std::size_t dim, const std::vector<std::size_t>& ids) {
  std::vector<bool> m(dim, false);
  for (std::size_t i : ids) {
    if (i >= dim) throw ShapeError("region index out of range");
    m[i] = true;
  }
  return IndexRegion(std::move(m));
}

std::vector<std::size_t> IndexRegion::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < member_.size(); ++i)
    if (member_[i]) out.push_back(i);
  return out;
}

IndexRegion IndexRegion::through(const Permutation& p) const {
  if (p.size() != member_.size()) throw ShapeError("region/permutation size mismatch");
  std::vector<bool> m(member_.size(), false);
  for (std::size_t i = 0; i < p.size(); ++i) m[p[i]] = member_[i];
  return IndexRegion(std::move(m));
}

IndexRegion significant_region_1d(std::size_t M, std::size_t r) {
  if (M % 2 != 0 || r > M / 2) throw ShapeError("significant_region_1d: bad size");
  std::vector<bool> m(M, false);
  for (std::size_t i = 0; i < r; ++i) m[i] = m[M / 2 + i] = true;
  return IndexRegion(std::move(m));
}

IndexRegion significant_region_2d(std::size_t n, std::size_t r) {
  if (n % 2 != 0 || r > n / 2) throw ShapeError("significant_region_2d: bad size");
  const std::size_t h = n / 2;
  auto low = [&](std::size_t v) { return (v % h) < r; };
  std::vector<bool> m(n * n, false);
  for (std::size_t col = 0; col < n; ++col)
    for (std::size_t row = 0; row < n; ++row) m[col * n + row] = low(row) && low(col);
  return IndexRegion(std::move(m));
}

Basis f1_scale(const Basis& base, const std::vector<double>& factors) {
  if (factors.size() != base.dim()) throw ShapeError("f1_scale: scale length mismatch");
  Vector d(idx(factors.size()));
  for (std::size_t j = 0; j < factors.size(); ++j) {
    if (factors[j] == 0.0 || !std::isfinite(factors[j])) throw ShapeError("f1_scale: zero scale factor");
    d[idx(j)] = factors[j];
  }
  return Basis(
      base.dim(), [base, d](const Vector& s) -> Vector { return base.synthesize(s.cwiseProduct(d)); },
      [base, d](const Vector& x) -> Vector { return base.analyze(x).cwiseQuotient(d); });
}

Basis f1_scale(const Basis& base, const ScalingDiag& d) { return f1_scale(base, d.values()); }

Basis f2_permute(const Basis& base, const Permutation& p) {
  if (p.size() != base.dim()) throw ShapeError("f2_permute: permutation size mismatch");
  return Basis(
      base.dim(), [base, p](const Vector& s) -> Vector { return base.synthesize(p.apply(s)); },
      [base, p](const Vector& x) -> Vector { return p.apply_transpose(base.analyze(x)); });
}

Vector f3_coefficients(const Vector& s, const std::vector<ColumnMix>& mixes) {
  Vector out = s;
  for (const auto& m : mixes) {
    const double sj = out[idx(m.j)];
    out[idx(m.j)] = sj / m.a;
    out[idx(m.k)] -= sj * m.b / m.a;
  }
  return out;
}

namespace {

// Inverse of f3_coefficients: s = Q s'.
Vector f3_uncoefficients(const Vector& sp, const std::vector<ColumnMix>& mixes) {
  Vector out = sp;
  for (auto it = mixes.rbegin(); it != mixes.rend(); ++it) {
    const double spj = out[idx(it->j)];
    out[idx(it->j)] = it->a * spj;
    out[idx(it->k)] += it->b * spj;
  }
  return out;
}

}  // namespace

Basis f3_mix(const Basis& base, std::vector<ColumnMix> mixes, const IndexRegion& region) {
  if (region.dim() != base.dim()) throw ShapeError("f3_mix: region size mismatch");
  std::vector<bool> used(base.dim(), false);
  for (const auto& m : mixes) {
    if (m.j >= base.dim() || m.k >= base.dim() || m.j == m.k) throw ShapeError("f3_mix: bad column pair");
    if (m.a == 0.0) throw ShapeError("f3_mix: a must be non-zero");
    if (used[m.j] || used[m.k]) throw ShapeError("f3_mix: mix records must use disjoint columns");
    if (region.contains(m.j) != region.contains(m.k))
      throw ShapeError("f3_mix: pair crosses the significant-region boundary");
    used[m.j] = used[m.k] = true;
  }
  auto shared = std::make_shared<const std::vector<ColumnMix>>(std::move(mixes));
  return Basis(
      base.dim(), [base, shared](const Vector& s) -> Vector { return base.synthesize(f3_uncoefficients(s, *shared)); },
      [base, shared](const Vector& x) -> Vector { return f3_coefficients(base.analyze(x), *shared); });
}

void validate(const SecretBasisSpec& spec) {
  const std::size_t dim = spec.dim();
  if (spec.n < 2 || spec.n % 2 != 0) throw ShapeError("secret basis: size must be even");
  if (!spec.perm.map().empty() && spec.perm.size() != dim) throw ShapeError("secret basis: permutation size");
  if (spec.scale.size() != 0 && spec.scale.size() != dim) throw ShapeError("secret basis: scaling size");
  if (!spec.mixes.empty() && spec.region.dim() != dim) throw ShapeError("secret basis: region size");
}

Basis build_secret_basis(const SecretBasisSpec& spec) {
  validate(spec);
  const std::size_t dim = spec.dim();
  Basis basis = spec.layout == BasisLayout::vector1d ? rpfrct_basis(spec.n, spec.alpha)
                                                     : rpfrct2d_basis(spec.n, spec.alpha, spec.beta);
  IndexRegion region = spec.region.dim() == dim ? spec.region : IndexRegion(std::vector<bool>(dim, false));
  if (!spec.perm.map().empty()) {
    basis = f2_permute(basis, spec.perm);
    region = region.through(spec.perm);
  }
  if (spec.scale.size() != 0) {
    std::vector<double> inv(dim);
    for (std::size_t j = 0; j < dim; ++j) inv[j] = 1.0 / spec.scale[j];
    basis = f1_scale(basis, inv);
  }
  if (!spec.mixes.empty()) basis = f3_mix(basis, spec.mixes, region);
  return basis;
}

Vector best_s_term(const Vector& coeffs, std::size_t s) {
  const auto n = static_cast<std::size_t>(coeffs.size());
  if (s > n) throw ShapeError("best_s_term: s exceeds length");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(s), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const double fa = std::abs(coeffs[idx(a)]), fb = std::abs(coeffs[idx(b)]);
                     return fa != fb ? fa > fb : a < b;
                   });
  Vector out = Vector::Zero(coeffs.size());
  for (std::size_t i = 0; i < s; ++i) out[idx(order[i])] = coeffs[idx(order[i])];
  return out;
}

}  // namespace blpcs
