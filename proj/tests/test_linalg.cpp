#include "cogom/errors.hpp"
#include "cogom/linalg.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace cogom;

namespace {

DenseMatrix dm(const oracle::Mat& m) { return m; }

}  // namespace

TEST(TopKEigen, IdentityGivesUnitEigenvalues) {
  const auto eig = top_k_eigen(DenseMatrix::Identity(3, 3), 2);
  EXPECT_DOUBLE_EQ(eig.values(0), 1.0);
  EXPECT_DOUBLE_EQ(eig.values(1), 1.0);
  const Eigen::MatrixXd utu = eig.vectors.transpose() * eig.vectors;
  EXPECT_LT((utu - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(TopKEigen, DiagonalCaseFollowsSignConvention) {
  DenseMatrix d = DenseMatrix::Zero(3, 3);
  d.diagonal() << 9, 4, 1;
  const auto eig = top_k_eigen(d, 2);
  EXPECT_NEAR(eig.values(0), 9.0, 1e-14);
  EXPECT_NEAR(eig.values(1), 4.0, 1e-14);
  EXPECT_NEAR(eig.vectors(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(eig.vectors(1, 1), 1.0, 1e-14);
  EXPECT_NEAR(eig.vectors.col(0).tail(2).norm(), 0.0, 1e-14);
}

TEST(TopKEigen, MatchesJacobiOracle) {
  std::mt19937_64 gen(11);
  for (int rep = 0; rep < 50; ++rep) {
    const oracle::Mat s = oracle::random_symmetric(gen, 6);
    const auto ref = oracle::jacobi_eigen(s);
    const auto eig = top_k_eigen(dm(s), 3);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(eig.values(i), ref.values(i), 1e-8);
    EXPECT_LT(oracle::sin_theta(ref.vectors.leftCols(3), eig.vectors), 1e-8);
  }
}

TEST(TopKEigen, LargestAlgebraicNotMagnitude) {
  DenseMatrix d = DenseMatrix::Zero(3, 3);
  d.diagonal() << -10, 2, 1;
  const auto eig = top_k_eigen(d, 1);
  EXPECT_NEAR(eig.values(0), 2.0, 1e-14);
}

TEST(TopKEigen, RejectsBadInput) {
  EXPECT_THROW(top_k_eigen(DenseMatrix::Zero(2, 3), 1), ShapeError);
  DenseMatrix asym(2, 2);
  asym << 1, 2, 0, 1;
  EXPECT_THROW(top_k_eigen(asym, 1), ShapeError);
  EXPECT_THROW(top_k_eigen(DenseMatrix::Identity(3, 3), 4), ArgumentError);
  EXPECT_THROW(top_k_eigen(DenseMatrix::Identity(3, 3), 0), ArgumentError);
  DenseMatrix nan = DenseMatrix::Identity(2, 2);
  nan(0, 0) = std::nan("");
  EXPECT_THROW(top_k_eigen(nan, 1), ValidationError);
}

TEST(TopKEigen, FullSpectrumAgreesWithOracle) {
  std::mt19937_64 gen(5);
  const oracle::Mat s = oracle::random_symmetric(gen, 9);
  const auto ref = oracle::jacobi_eigen(s);
  const Vector all = symmetric_eigenvalues(dm(s));
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(all(i), ref.values(i), 1e-10);
  const auto both = top_k_eigen_with_spectrum(dm(s), 2);
  EXPECT_EQ(both.spectrum.size(), 9);
  EXPECT_NEAR(both.top.values(1), ref.values(1), 1e-10);
  EXPECT_NEAR(symmetric_spectral_norm(dm(s)), ref.values.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Gram, SmallCases) {
  EXPECT_EQ(gram(DenseMatrix::Identity(2, 2)), DenseMatrix::Identity(2, 2));
  DenseMatrix a(1, 2);
  a << 1, 2;
  const DenseMatrix g = gram(a);
  ASSERT_EQ(g.rows(), 1);
  EXPECT_DOUBLE_EQ(g(0, 0), 5.0);
}

TEST(Gram, MatchesTripleLoop) {
  std::mt19937_64 gen(3);
  const oracle::Mat a = oracle::random_matrix(gen, 4, 3);
  const oracle::Mat ref = oracle::naive_product(a, a.transpose());
  EXPECT_LT((gram(dm(a)) - ref).cwiseAbs().maxCoeff(), 1e-12);
  const DenseMatrix g = gram(dm(a));
  EXPECT_EQ(g, g.transpose());
}

TEST(Hollow, Examples) {
  DenseMatrix a(2, 2);
  a << 1, 2, 3, 4;
  DenseMatrix h(2, 2);
  h << 0, 2, 3, 0;
  EXPECT_EQ(hollow(a), h);
  EXPECT_EQ(hollow(DenseMatrix::Zero(3, 3)), DenseMatrix::Zero(3, 3));
  std::mt19937_64 gen(9);
  const DenseMatrix r = oracle::random_matrix(gen, 5, 5);
  EXPECT_EQ(hollow(hollow(r)), hollow(r));
}

TEST(LowRank, Examples) {
  Vector u(3);
  u << 1, -2, 0.5;
  const DenseMatrix s = u * u.transpose();
  EXPECT_LT((low_rank_approx(s, 1) - s).cwiseAbs().maxCoeff(), 1e-10);

  DenseMatrix d = DenseMatrix::Zero(3, 3);
  d.diagonal() << 3, 2, 1;
  DenseMatrix want = DenseMatrix::Zero(3, 3);
  want.diagonal() << 3, 2, 0;
  EXPECT_LT((low_rank_approx(d, 2) - want).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(LowRank, MatchesOracleTruncation) {
  // For a symmetric matrix with non-negative top-2 eigenvalues dominating in
  // magnitude, truncating the eigendecomposition is the Frobenius-optimal
  // rank-2 approximation; compare against the oracle's truncation.
  std::mt19937_64 gen(21);
  for (int rep = 0; rep < 20; ++rep) {
    const oracle::Mat b = oracle::random_matrix(gen, 5, 5);
    const oracle::Mat s = b * b.transpose();
    const auto ref = oracle::jacobi_eigen(s);
    const oracle::Mat want = ref.vectors.leftCols(2) * ref.values.head(2).asDiagonal() *
                             ref.vectors.leftCols(2).transpose();
    const DenseMatrix got = low_rank_approx(dm(s), 2);
    EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-9 * s.norm());
    // No random rank-2 candidate does better.
    const double best = (s - want).norm();
    for (int c = 0; c < 20; ++c) {
      const oracle::Mat f = oracle::random_matrix(gen, 5, 2);
      const oracle::Mat cand = f * (f.transpose() * f).inverse() * f.transpose() * s;
      EXPECT_GE((s - cand).norm(), best - 1e-9);
    }
  }
}

TEST(Norms, Examples) {
  const auto n = norms(DenseMatrix::Identity(2, 2));
  EXPECT_NEAR(n.frobenius, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(n.spectral, 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(n.two_to_inf, 1.0);
  EXPECT_DOUBLE_EQ(n.entry_inf, 1.0);
  DenseMatrix a(1, 2);
  a << 3, 4;
  const auto m = norms(a);
  EXPECT_NEAR(m.frobenius, 5.0, 1e-14);
  EXPECT_NEAR(m.spectral, 5.0, 1e-12);
  EXPECT_DOUBLE_EQ(m.two_to_inf, 5.0);
  EXPECT_DOUBLE_EQ(m.entry_inf, 4.0);
}

TEST(Norms, SpectralMatchesOracle) {
  std::mt19937_64 gen(17);
  for (int rep = 0; rep < 20; ++rep) {
    const oracle::Mat a = oracle::random_matrix(gen, 4, 4);
    const auto ref = oracle::jacobi_eigen(a * a.transpose());
    const double s = norms(dm(a)).spectral;
    EXPECT_NEAR(s * s, ref.values(0), 1e-9 * ref.values(0));
  }
}

TEST(Reconstruct, IsExactlySymmetric) {
  std::mt19937_64 gen(2);
  const oracle::Mat s = oracle::random_symmetric(gen, 7);
  const DenseMatrix r = reconstruct(top_k_eigen(dm(s), 3));
  EXPECT_EQ(r, r.transpose());
}
