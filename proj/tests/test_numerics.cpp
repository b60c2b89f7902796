#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"

using namespace z2kms;

TEST(HermEig, IdentityAndDiagonal) {
  EXPECT_TRUE(herm_eig(identity(2)).values.isApprox(RVector::Ones(2)));
  const HermEig e = herm_eig(oracle::diag({3, -1}));
  EXPECT_DOUBLE_EQ(e.values(0), -1.0);
  EXPECT_DOUBLE_EQ(e.values(1), 3.0);
}

TEST(HermEig, PauliX) {
  CMatrix x(2, 2);
  x << 0, 1, 1, 0;
  const HermEig e = herm_eig(x);
  EXPECT_NEAR(e.values(0), -1.0, 1e-14);
  EXPECT_NEAR(e.values(1), 1.0, 1e-14);
}

TEST(HermEig, RejectsNonHermitian) {
  CMatrix x(2, 2);
  x << 0, 1, 0, 0;
  try {
    herm_eig(x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotHermitian);
  }
}

TEST(HermEig, ReconstructsRandomUpTo64) {
  std::mt19937_64 rng(101);
  for (Eigen::Index d : {1, 2, 5, 17, 40, 64}) {
    const CMatrix a = oracle::random_hermitian(rng, d);
    const HermEig e = herm_eig(a);
    const CMatrix back = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
    EXPECT_LE(max_abs(back - a), 10 * kDefaultTol * op_norm(a)) << d;
    EXPECT_TRUE(is_unitary(e.vectors, 1e-10));
    for (Eigen::Index i = 1; i < d; ++i) EXPECT_LE(e.values(i - 1), e.values(i));
  }
}

TEST(MatExp, Examples) {
  EXPECT_LE(max_abs(mat_exp(CMatrix::Zero(2, 2)) - identity(2)), 1e-15);
  EXPECT_LE(max_abs(mat_exp(oracle::diag({std::log(3.0), 0})) - oracle::diag({3, 1})), 1e-14);
  const CMatrix a = cplx(0, M_PI) * oracle::diag({1, 0});
  EXPECT_LE(max_abs(mat_exp(a) - oracle::diag({-1, 1})), 1e-14);
}

TEST(MatExp, MatchesSeriesOnNonNormal) {
  CMatrix a(2, 2);
  a << 0.3, 1.0, 0.0, -0.2;
  CMatrix series = identity(2);
  CMatrix term = identity(2);
  for (int k = 1; k < 40; ++k) {
    term = term * a / static_cast<double>(k);
    series += term;
  }
  EXPECT_LE(max_abs(mat_exp(a) - series), 1e-13);
}

TEST(MatExp, GroupLawOnCommutingInputs) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix h = oracle::random_hermitian(rng, 6);
    const HermEig e = herm_eig(h);
    // Functions of the same Hermitian matrix commute.
    const CMatrix a = cplx(0, 0.7) * h;
    const CMatrix b = e.vectors * (e.values.array().square().matrix().cast<cplx>() * 0.1).asDiagonal() *
                      e.vectors.adjoint();
    EXPECT_LE(max_abs(mat_exp(a + b) - mat_exp(a) * mat_exp(b)), 1e-10);
  }
}

TEST(OpNorm, Examples) {
  EXPECT_NEAR(op_norm(identity(4)), 1.0, 1e-15);
  EXPECT_NEAR(op_norm(oracle::diag({2, -0.5})), 2.0, 1e-15);
  CMatrix n(2, 2);
  n << 0, 3, 0, 0;
  EXPECT_NEAR(op_norm(n), 3.0, 1e-15);
}

TEST(OpNorm, Submultiplicative) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const CMatrix a = oracle::random_matrix(rng, 5);
    const CMatrix b = oracle::random_matrix(rng, 5);
    EXPECT_LE(op_norm(a * b), op_norm(a) * op_norm(b) * (1 + 1e-12));
  }
}

TEST(Nullspace, Examples) {
  EXPECT_EQ(nullspace(CMatrix::Zero(2, 2)).cols(), 2);
  EXPECT_EQ(nullspace(identity(3)).cols(), 0);
  CMatrix ones(2, 2);
  ones << 1, 1, 1, 1;
  const CMatrix k = nullspace(ones);
  ASSERT_EQ(k.cols(), 1);
  // Unique up to phase: compare |<k, (1,-1)/sqrt2>|.
  CVector v(2);
  v << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(v.dot(k.col(0))), 1.0, 1e-14);
}

TEST(Nullspace, RandomRankDeficient) {
  std::mt19937_64 rng(3);
  const CMatrix a = oracle::random_matrix(rng, 7).leftCols(3);
  const CMatrix l = a * oracle::random_matrix(rng, 7).topRows(3);  // rank 3
  const CMatrix k = nullspace(l, 1e-9);
  EXPECT_EQ(k.cols(), 4);
  EXPECT_LE(max_abs(l * k), 1e-9);
  EXPECT_LE(max_abs(k.adjoint() * k - identity(4)), 1e-12);
}

TEST(Positivity, PsdAndPolar) {
  std::mt19937_64 rng(5);
  const CMatrix x = oracle::random_matrix(rng, 4);
  EXPECT_TRUE(is_psd(x.adjoint() * x));
  EXPECT_FALSE(is_psd(oracle::diag({1, -1e-3})));
  const Polar p = polar(x);
  EXPECT_LE(max_abs(p.isometry * p.modulus - x), 1e-12);
  EXPECT_TRUE(is_unitary(p.isometry, 1e-12));
  EXPECT_LE(max_abs(sqrt_psd(x.adjoint() * x) - p.modulus), 1e-10);
}
