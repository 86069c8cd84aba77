#include <doctest.h>

#include <Eigen/SVD>

#include "lowrl/linalg.hpp"
#include "lowrl/rng.hpp"

using namespace lowrl;

namespace {

Matrix random_matrix(Index m, Index n, RngStream& rng) {
  Matrix a(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = rng.normal();
  return a;
}

Matrix random_rank(Index m, Index n, int r, RngStream& rng) {
  return random_matrix(m, r, rng) * random_matrix(r, n, rng);
}

}  // namespace

TEST_CASE("svd_spectrum on simple matrices") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  const auto sv = svd_spectrum(d);
  REQUIRE(sv.size() == 2);
  CHECK(sv(0) == doctest::Approx(3.0));
  CHECK(sv(1) == doctest::Approx(1.0));

  const auto zero = svd_spectrum(Matrix::Zero(2, 2));
  CHECK(zero(0) == doctest::Approx(0.0));
  CHECK(zero(1) == doctest::Approx(0.0));

  // eigenvalues of A^T A are 25 and 0 (trace 25, rank 1), so sigma = (5, 0)
  Matrix a(2, 2);
  a << 1, 2, 2, 4;
  const auto sv2 = svd_spectrum(a);
  CHECK(sv2(0) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(sv2(1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("svd_spectrum input and ordering contracts") {
  Matrix bad(1, 2);
  bad << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(svd_spectrum(bad), InputError);

  RngStream rng(7);
  const Matrix m = random_matrix(9, 6, rng);
  const auto sv = svd_spectrum(m);
  for (Index i = 0; i + 1 < sv.size(); ++i) CHECK(sv(i) >= sv(i + 1));
  CHECK(sv(sv.size() - 1) >= 0.0);

  // full SVD reconstructs to 1e-10 * sigma_1 relative
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix sigma = Matrix::Zero(9, 6);
  for (Index i = 0; i < sv.size(); ++i) sigma(i, i) = sv(i);
  const Matrix rec = svd.matrixU() * sigma * svd.matrixV().transpose();
  CHECK((rec - m).cwiseAbs().maxCoeff() <= 1e-10 * sv(0));
}

TEST_CASE("svd_spectrum is invariant under row/column permutation") {
  RngStream rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = random_matrix(7, 5, rng);
    Matrix p = m;
    const Index r1 = static_cast<Index>(rng.below(7)),
                r2 = static_cast<Index>(rng.below(7));
    p.row(r1).swap(p.row(r2));
    const Index c1 = static_cast<Index>(rng.below(5)),
                c2 = static_cast<Index>(rng.below(5));
    p.col(c1).swap(p.col(c2));
    const auto s1 = svd_spectrum(m);
    const auto s2 = svd_spectrum(p);
    for (Index i = 0; i < s1.size(); ++i)
      CHECK(s1(i) == doctest::Approx(s2(i)).epsilon(1e-10));
  }
}

TEST_CASE("pseudoinverse basics") {
  CHECK((pseudoinverse(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() < 1e-12);

  // rank-1: pinv(u v^T) = v u^T / (|u|^2 |v|^2)
  Matrix a(2, 2);
  a << 1, 2, 2, 4;
  Matrix expected(2, 2);
  expected << 0.04, 0.08, 0.08, 0.16;
  CHECK((pseudoinverse(a) - expected).cwiseAbs().maxCoeff() < 1e-12);

  // all-zero input: zero matrix of transposed shape is a valid pinv
  const Matrix z = pseudoinverse(Matrix::Zero(2, 3));
  CHECK(z.rows() == 3);
  CHECK(z.cols() == 2);
  CHECK(z.cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(pseudoinverse(a, 0.0), InputError);
  CHECK_THROWS_AS(pseudoinverse(a, 1.5), InputError);
}

TEST_CASE("pseudoinverse satisfies the Moore-Penrose axioms") {
  RngStream rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const Index m = 2 + static_cast<Index>(rng.below(8));
    const Index n = 2 + static_cast<Index>(rng.below(8));
    const int r = 1 + static_cast<int>(rng.below(
                          static_cast<std::uint64_t>(std::min(m, n))));
    const Matrix a = random_rank(m, n, r, rng);
    const Matrix p = pseudoinverse(a);
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    CHECK((a * p * a - a).cwiseAbs().maxCoeff() <= 1e-9 * scale);
    CHECK((p * a * p - p).cwiseAbs().maxCoeff() <= 1e-9 * scale);
    CHECK(((a * p) - (a * p).transpose()).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(((p * a) - (p * a).transpose()).cwiseAbs().maxCoeff() <= 1e-9);
    // (M^T)^dagger == (M^dagger)^T
    const Matrix pt = pseudoinverse(Matrix(a.transpose()));
    CHECK((pt - p.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale);
  }
}

TEST_CASE("effective_rank tail rule") {
  SingularSpectrum s(3);
  s << 3, 1, 0.1;
  CHECK(effective_rank(s, 0.02) == 2);  // tail 0.01 <= 0.02
  CHECK(effective_rank(s, 100.0) == 0);
  CHECK(effective_rank(s, s.squaredNorm()) == 0);

  SingularSpectrum t(3);
  t << 5, 0, 0;
  CHECK(effective_rank(t, 0.0) == 1);

  SingularSpectrum u(2);
  u << 2, 1;
  CHECK(effective_rank(u, 0.0) == 2);  // zero-free tail keeps full length

  CHECK_THROWS_AS(effective_rank(s, -1.0), InputError);
}

TEST_CASE("MaskedMatrix invariants") {
  CHECK_THROWS_AS(
      MaskedMatrix(Matrix::Zero(2, 2), BoolMatrix::Constant(3, 2, true)),
      InputError);
  MaskedMatrix m = MaskedMatrix::full(Matrix::Ones(2, 3));
  CHECK(m.observed_count() == 6);
  m.observed(1, 2) = false;
  CHECK(m.observed_count() == 5);
  CHECK(m.row_observed(0));
  CHECK(!m.row_observed(1));
  CHECK(!m.col_observed(2));
  const Matrix filled = m.filled(-7.0);
  CHECK(filled(1, 2) == -7.0);
  CHECK(filled(0, 0) == 1.0);
}
