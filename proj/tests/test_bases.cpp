#include "blpcs/bases.hpp"
#include "blpcs/errors.hpp"
#include "blpcs/imaging.hpp"
#include "blpcs/permutation.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

using namespace blpcs;
using namespace testsupport;

namespace {

DenseMatrix two_dct_blocks(std::size_t M) {
  DenseMatrix R = DenseMatrix::Zero(Eigen::Index(M), Eigen::Index(M));
  const DenseMatrix C = dct_matrix(M / 2);
  R.topLeftCorner(C.rows(), C.cols()) = C;
  R.bottomRightCorner(C.rows(), C.cols()) = C;
  return R;
}

// Support drawn so every mix pair is fully inside or fully outside it: the
// whole region plus a few coefficients outside the region and the mixes.
Vector region_respecting_signal(RandStream& s, const IndexRegion& region, const std::vector<ColumnMix>& mixes,
                                std::size_t extra) {
  const std::size_t dim = region.dim();
  std::vector<bool> blocked(dim, false);
  for (const auto& m : mixes) blocked[m.j] = blocked[m.k] = true;
  Vector v = Vector::Zero(Eigen::Index(dim));
  for (std::size_t i : region.indices()) v[Eigen::Index(i)] = 1.0 + s.next_uniform();
  std::size_t placed = 0;
  while (placed < extra) {
    const auto i = static_cast<std::size_t>(s.next_below(dim));
    if (region.contains(i) || blocked[i] || v[Eigen::Index(i)] != 0.0) continue;
    v[Eigen::Index(i)] = s.next_uniform() < 0.5 ? -1.0 - s.next_uniform() : 1.0 + s.next_uniform();
    ++placed;
  }
  return v;
}

std::vector<ColumnMix> random_mixes(RandStream& s, const IndexRegion& region, std::size_t inside, std::size_t outside) {
  std::vector<ColumnMix> mixes;
  std::vector<bool> used(region.dim(), false);
  auto draw = [&](bool in) {
    for (;;) {
      const auto i = static_cast<std::size_t>(s.next_below(region.dim()));
      if (!used[i] && region.contains(i) == in) {
        used[i] = true;
        return i;
      }
    }
  };
  for (std::size_t t = 0; t < inside + outside; ++t) {
    const bool in = t < inside;
    ColumnMix m;
    m.j = draw(in);
    m.k = draw(in);
    m.a = 0.5 + 1.5 * s.next_uniform();
    m.b = -2.0 + 4.0 * s.next_uniform();
    mixes.push_back(m);
  }
  return mixes;
}

}  // namespace

TEST_SUITE("bases") {
  TEST_CASE("DCT matrix") {
    CHECK(dct_matrix(1)(0, 0) == doctest::Approx(1.0));
    const DenseMatrix C8 = dct_matrix(8);
    CHECK(max_abs(C8.transpose() * C8 - DenseMatrix::Identity(8, 8)) < 1e-12);

    const DenseMatrix C4 = dct_matrix(4);
    for (int l = 0; l < 4; ++l)
      for (int i = 0; i < 4; ++i) {
        const double eps = l == 0 ? 1.0 : std::sqrt(2.0);
        const double ref = eps / 2.0 * std::cos(std::numbers::pi * (2 * i + 1) * l / 8.0);
        CHECK(C4(l, i) == doctest::Approx(ref).epsilon(1e-14));
      }
    CHECK_THROWS_AS(dct_matrix(0), ShapeError);
  }

  TEST_CASE("fractional DCT") {
    for (std::size_t n : {4u, 7u, 16u}) {
      CHECK((dfrct_matrix(n, 0.0) - ComplexMatrix::Identity(Eigen::Index(n), Eigen::Index(n))).cwiseAbs().maxCoeff() <
            1e-10);
      CHECK((dfrct_matrix(n, 1.0) - dct_matrix(n).cast<std::complex<double>>()).cwiseAbs().maxCoeff() < 1e-10);
      const ComplexMatrix prod = dfrct_matrix(n, 0.3) * dfrct_matrix(n, 0.7);
      CHECK((prod - dfrct_matrix(n, 1.0)).cwiseAbs().maxCoeff() < 1e-6);
      const ComplexMatrix B = dfrct_matrix(n, 0.42);
      CHECK((B.adjoint() * B - ComplexMatrix::Identity(B.rows(), B.cols())).cwiseAbs().maxCoeff() < 1e-10);
    }
    const EigenSystem& eig = dct_eigensystem(16);
    CHECK(eig.reconstruction_error < 1e-10);
    for (double phi : eig.phis) CHECK((phi > -std::numbers::pi && phi <= std::numbers::pi));
  }

  TEST_CASE("reality-preserving transform") {
    CHECK(max_abs(rpfrct_matrix(8, 0.0) - DenseMatrix::Identity(8, 8)) < 1e-10);
    CHECK(max_abs(rpfrct_matrix(8, 1.0) - two_dct_blocks(8)) < 1e-10);

    RandStream s(KeySeed{1}, "x");
    const Vector x = gaussian_vector(s, 8);
    const ComplexMatrix B = dfrct_matrix(4, 0.37);
    Eigen::VectorXcd packed(4);
    for (int i = 0; i < 4; ++i) packed[i] = {x[i], x[i + 4]};
    const Eigen::VectorXcd z = B * packed;
    const Vector r = rpfrct_matrix(8, 0.37) * x;
    for (int i = 0; i < 4; ++i) {
      CHECK(r[i] == doctest::Approx(z[i].real()).epsilon(1e-12));
      CHECK(r[i + 4] == doctest::Approx(z[i].imag()).epsilon(1e-12));
    }
    CHECK_THROWS_AS(rpfrct_matrix(7, 0.5), ShapeError);
  }

  TEST_CASE("orthogonality at every size") {
    for (std::size_t n : {4u, 8u, 16u, 64u, 256u, 512u}) {
      const DenseMatrix C = dct_matrix(n);
      CHECK(max_abs(C.transpose() * C - DenseMatrix::Identity(C.rows(), C.cols())) < 1e-8);
      for (double a : {0.5, 0.95, 0.99}) {
        const DenseMatrix R = rpfrct_matrix(n, a);
        CHECK(max_abs(R.transpose() * R - DenseMatrix::Identity(R.rows(), R.cols())) < 1e-8);
      }
    }
  }

  TEST_CASE("2D transform") {
    RandStream s(KeySeed{2}, "X");
    const DenseMatrix X = gaussian_matrix(s, 4, 4);
    CHECK(max_abs(rpfrct2d_forward(X, 0.0, 0.0) - X) < 1e-10);
    const DenseMatrix S = rpfrct2d_forward(X, 0.8, 0.6);
    CHECK(std::abs(S.norm() - X.norm()) < 1e-8);

    const DenseMatrix Ra = rpfrct_matrix(4, 0.8), Rb = rpfrct_matrix(4, 0.6);
    DenseMatrix K(16, 16);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) K.block(4 * i, 4 * j, 4, 4) = Rb(i, j) * Ra;
    const Eigen::Map<const Vector> vx(X.data(), 16), vs(S.data(), 16);
    CHECK((K * vx - vs).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(max_abs(rpfrct2d_inverse(S, 0.8, 0.6) - X) < 1e-10);

    const Basis b = rpfrct2d_basis(4, 0.8, 0.6);
    CHECK((b.analyze(vx) - vs).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((b.synthesize(vs) - vx).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("F1 scaling") {
    const Basis base = rpfrct_basis(16, 0.9);
    RandStream s(KeySeed{3}, "f1");
    const Vector x = gaussian_vector(s, 16);
    CHECK((f1_scale(base, ScalingDiag::ones(16)).analyze(x) - base.analyze(x)).cwiseAbs().maxCoeff() == 0.0);

    RandStream sd(KeySeed{3}, "scale");
    const ScalingDiag d = random_integer_scaling(sd, 16, 60);
    const Basis scaled = f1_scale(base, d);
    const Vector sv = gaussian_vector(s, 16);
    const Vector sp = scaled.analyze(base.synthesize(sv));
    for (int j = 0; j < 16; ++j) CHECK(sp[j] == doctest::Approx(sv[j] / d[std::size_t(j)]).epsilon(1e-10));
    // Synthesis of s' scales columns: Psi' e_j = d_j psi_j.
    const Vector e3 = Vector::Unit(16, 3);
    CHECK((scaled.synthesize(e3) - d[3] * base.synthesize(e3)).cwiseAbs().maxCoeff() < 1e-12);

    RandStream sm(KeySeed{4}, "f1-256");
    const Basis b256 = rpfrct_basis(256, 0.95);
    const Basis s256 = f1_scale(b256, random_integer_scaling(sm, 256, 60));
    const Vector sparse = sparse_vector(sm, 256, 10);
    CHECK(nnz(s256.analyze(b256.synthesize(sparse)), 1e-9) == 10);
  }

  TEST_CASE("F2 permutation") {
    const Basis base = rpfrct_basis(64, 0.9);
    RandStream s(KeySeed{5}, "f2");
    const Vector x = gaussian_vector(s, 64);
    CHECK((f2_permute(base, Permutation::identity(64)).analyze(x) - base.analyze(x)).cwiseAbs().maxCoeff() == 0.0);

    const Permutation p = random_permutation(s, 64);
    const Basis permuted = f2_permute(base, p);
    const Vector sv = sparse_vector(s, 64, 5);
    const Vector sp = permuted.analyze(base.synthesize(sv));
    for (std::size_t i = 0; i < 64; ++i)
      if (sv[Eigen::Index(i)] != 0.0) CHECK(sp[Eigen::Index(p[i])] == doctest::Approx(sv[Eigen::Index(i)]));

    int preserved = 0;
    for (int t = 0; t < 1000; ++t) {
      const Vector st = sparse_vector(s, 64, 10);
      preserved += nnz(permuted.analyze(base.synthesize(st)), 1e-9) == 10;
    }
    CHECK(preserved == 1000);
  }

  TEST_CASE("F3 column mixing") {
    const Basis base = rpfrct_basis(16, 0.9);
    const IndexRegion none(std::vector<bool>(16, false));
    RandStream s(KeySeed{6}, "f3");
    const Vector x = gaussian_vector(s, 16);
    const Basis trivial = f3_mix(base, {{2, 5, 1.0, 0.0}}, none);
    CHECK((trivial.analyze(x) - base.analyze(x)).cwiseAbs().maxCoeff() == 0.0);

    Vector sv = Vector::Zero(16);
    sv[0] = 3.0;
    sv[9] = -1.0;
    CHECK(f3_coefficients(sv, {{2, 5, 2.0, 3.0}}) == sv);

    Vector sj = Vector::Zero(16);
    sj[2] = 4.0;
    sj[5] = 5.0;
    const Vector sp = f3_coefficients(sj, {{2, 5, 2.0, 3.0}});
    CHECK(sp[2] == 2.0);
    CHECK(sp[5] == -1.0);
    const Basis mixed = f3_mix(base, {{2, 5, 2.0, 3.0}}, none);
    CHECK((mixed.analyze(base.synthesize(sj)) - sp).cwiseAbs().maxCoeff() < 1e-12);
    // Column j of the mixed basis is a psi_j + b psi_k.
    const Vector col = mixed.synthesize(Vector::Unit(16, 2));
    CHECK((col - 2.0 * base.synthesize(Vector::Unit(16, 2)) - 3.0 * base.synthesize(Vector::Unit(16, 5)))
              .cwiseAbs()
              .maxCoeff() < 1e-12);

    const IndexRegion region = IndexRegion::from_indices(16, {0, 1, 2});
    CHECK_THROWS_AS(f3_mix(base, {{2, 5, 2.0, 3.0}}, region), ShapeError);
    CHECK_THROWS_AS(f3_mix(base, {{0, 1, 0.0, 3.0}}, region), ShapeError);
    CHECK_THROWS_AS(f3_mix(base, {{0, 1, 1.0, 1.0}, {1, 2, 1.0, 1.0}}, region), ShapeError);
  }

  TEST_CASE("F3 coefficient update on integer inputs") {
    RandStream s(KeySeed{7}, "eq8");
    const double as[] = {1.0, -1.0, 2.0, -2.0, 4.0, 0.5};
    for (int t = 0; t < 1000; ++t) {
      const double a = as[s.next_below(6)];
      const double b = double(std::int64_t(s.next_below(21)) - 10);
      const double sj = double(std::int64_t(s.next_below(201)) - 100);
      const double sk = double(std::int64_t(s.next_below(201)) - 100);
      Vector v = Vector::Zero(4);
      v[1] = sj;
      v[3] = sk;
      const Vector out = f3_coefficients(v, {{1, 3, a, b}});
      REQUIRE(a * out[1] == sj);
      REQUIRE(out[3] + b * out[1] == sk);
      REQUIRE(out[0] == 0.0);
      REQUIRE(out[2] == 0.0);
    }
  }

  TEST_CASE("secret basis") {
    SecretBasisSpec plain;
    plain.n = 16;
    const Basis pb = build_secret_basis(plain);
    CHECK(max_abs(pb.analysis_matrix() - two_dct_blocks(16)) < 1e-10);

    RandStream s(KeySeed{8}, "secret");
    SecretBasisSpec spec;
    spec.n = 64;
    spec.alpha = 0.93;
    spec.perm = random_permutation(s, 64);
    spec.scale = random_integer_scaling(s, 64, 60);
    spec.region = significant_region_1d(64, 8);
    spec.mixes = random_mixes(s, spec.region.through(spec.perm), 3, 4);
    const Basis secret = build_secret_basis(spec);
    const Vector x = gaussian_vector(s, 64);
    CHECK((secret.synthesize(secret.analyze(x)) - x).cwiseAbs().maxCoeff() < 1e-8);

    // Psi_K = Psi_R P D Q, checked on the dense matrices.
    DenseMatrix Q = DenseMatrix::Identity(64, 64);
    for (const auto& m : spec.mixes) {
      Q(Eigen::Index(m.j), Eigen::Index(m.j)) = m.a;
      Q(Eigen::Index(m.k), Eigen::Index(m.j)) = m.b;
    }
    Vector dinv(64);
    for (int j = 0; j < 64; ++j) dinv[j] = 1.0 / spec.scale[std::size_t(j)];
    const DenseMatrix psi = rpfrct_matrix(64, 0.93).transpose() * spec.perm.to_matrix() * dinv.asDiagonal() * Q;
    CHECK(max_abs(secret.synthesis_matrix() - psi) < 1e-10);
  }

  TEST_CASE("secret basis keeps the sparsity of region-respecting signals") {
    const std::size_t M = 64;
    const Basis rbase = rpfrct_basis(M, 0.95);
    int exact = 0;
    for (std::uint64_t t = 0; t < 1000; ++t) {
      RandStream s(KeySeed{t}, "equivalence");
      SecretBasisSpec spec;
      spec.n = M;
      spec.alpha = 0.95;
      spec.perm = random_permutation(s, M);
      spec.scale = random_integer_scaling(s, M, 60);
      spec.region = significant_region_1d(M, 4);
      // Mix records live in column positions; the region seen there is P-mapped.
      const IndexRegion moved = spec.region.through(spec.perm);
      spec.mixes = random_mixes(s, moved, 2, 3);
      const Vector sp = region_respecting_signal(s, moved, spec.mixes, 6);
      const Vector r_coeffs = spec.perm.apply(sp);  // R_alpha-domain coefficients of x
      const Vector x = rbase.synthesize(r_coeffs);
      const Vector secret = build_secret_basis(spec).analyze(x);
      exact += nnz(secret, 1e-9) == nnz(r_coeffs, 0.0);
    }
    CHECK(exact == 1000);
  }

  TEST_CASE("significant regions") {
    const IndexRegion r1 = significant_region_1d(16, 2);
    CHECK(r1.indices() == std::vector<std::size_t>{0, 1, 8, 9});
    const IndexRegion r2 = significant_region_2d(8, 1);
    CHECK(r2.indices() == std::vector<std::size_t>{0, 4, 32, 36});
    const Permutation p(std::vector<std::size_t>{2, 0, 1, 3});
    const IndexRegion r = IndexRegion::from_indices(4, {0});
    const IndexRegion moved = r.through(p);
    // Column j of Psi P is psi_{map^-1(j)}, so original column 0 sits at position map[0] = 2.
    CHECK(moved.indices() == std::vector<std::size_t>{2});
  }

  TEST_CASE("best s-term") {
    const Vector c = Vector::LinSpaced(6, -3.0, 2.0);
    CHECK(best_s_term(c, 6) == c);
    CHECK(best_s_term(c, 0) == Vector::Zero(6));
    Vector v(4);
    v << 3, -5, 1, 4;
    Vector expected(4);
    expected << 0, -5, 0, 4;
    CHECK(best_s_term(v, 2) == expected);

    // Brute force over every 2-subset.
    RandStream s(KeySeed{9}, "sterm");
    const Vector g = gaussian_vector(s, 7);
    double best = 1e300;
    for (int i = 0; i < 7; ++i)
      for (int j = i + 1; j < 7; ++j) {
        Vector keep = Vector::Zero(7);
        keep[i] = g[i];
        keep[j] = g[j];
        best = std::min(best, (g - keep).norm());
      }
    CHECK((g - best_s_term(g, 2)).norm() == doctest::Approx(best));
    CHECK_THROWS_AS(best_s_term(v, 5), ShapeError);
  }

  TEST_CASE("coefficient energy concentrates in the sub-block corners") {
    const GrayImage image = load_pgm(std::string(BLPCS_DATA_DIR) + "/coffee.pgm");
    const std::size_t n = image.n();
    const DenseMatrix S = rpfrct2d_forward(image.pixels, 0.99, 0.95);
    const IndexRegion corners = significant_region_2d(n, n / 4);
    const Eigen::Map<const Vector> vs(S.data(), S.size());
    double inside = 0.0;
    for (std::size_t i : corners.indices()) inside += vs[Eigen::Index(i)] * vs[Eigen::Index(i)];
    MESSAGE("corner energy fraction " << inside / vs.squaredNorm());
    CHECK(inside / vs.squaredNorm() >= 0.70);
  }
}
