#include "cogom/errors.hpp"
#include "cogom/simplex.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace cogom;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const double x : v) out(i++) = x;
  return out;
}

// Rows of pi * vertices for a random simplex in R^k.
DenseMatrix embed(const oracle::Mat& pi, std::mt19937_64& gen) {
  const auto k = pi.cols();
  oracle::Mat vertices = oracle::random_matrix(gen, k, k) + 3.0 * oracle::Mat::Identity(k, k);
  return pi * vertices;
}

}  // namespace

TEST(ProjectToSimplex, Examples) {
  EXPECT_LT((project_to_simplex(vec({0.2, 0.3, 0.5})) - vec({0.2, 0.3, 0.5})).norm(), 1e-15);
  EXPECT_LT((project_to_simplex(vec({0.5, 0.5, 0.5})) - Vector::Constant(3, 1.0 / 3)).norm(),
            1e-15);
  EXPECT_LT((project_to_simplex(vec({1.2, -0.1, 0.3})) - vec({0.95, 0.0, 0.05})).norm(), 1e-12);
  EXPECT_LT((project_to_simplex(vec({7.0})) - vec({1.0})).norm(), 1e-15);
}

TEST(ProjectToSimplex, MatchesKktOracle) {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_int_distribution<int> kd(2, 8);
  for (int rep = 0; rep < 2000; ++rep) {
    Vector v(kd(gen));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = u(gen);
    EXPECT_LT((project_to_simplex(v) - oracle::simplex_projection_kkt(v)).norm(), 1e-9);
  }
}

TEST(ProjectToSimplex, RejectsNonFinite) {
  EXPECT_THROW(project_to_simplex(vec({1.0, std::nan("")})), ValidationError);
  EXPECT_THROW(project_to_simplex(Vector()), ArgumentError);
}

TEST(SuccessiveProjection, FindsUnitRows) {
  std::mt19937_64 gen(2);
  const oracle::Mat pi = oracle::random_memberships(gen, 20, 4);
  // Interior rows strictly inside: mix every row with the barycentre.
  oracle::Mat u = pi;
  u.bottomRows(16) = 0.8 * pi.bottomRows(16) + 0.2 * oracle::Mat::Constant(16, 4, 0.25);
  const auto s = successive_projection(u, 4);
  std::set<std::size_t> got(s.indices.begin(), s.indices.end());
  EXPECT_EQ(got, (std::set<std::size_t>{0, 1, 2, 3}));
}

TEST(SuccessiveProjection, SingleProfilePicksLargestRow) {
  DenseMatrix u(4, 1);
  u << 0.1, 0.5, -0.9, 0.3;
  EXPECT_EQ(successive_projection(u, 1).indices, std::vector<std::size_t>{2});
}

TEST(SuccessiveProjection, TiesGoToLowestIndex) {
  DenseMatrix u(3, 1);
  u << 1.0, -1.0, 1.0;
  EXPECT_EQ(successive_projection(u, 1).indices, std::vector<std::size_t>{0});
}

TEST(SuccessiveProjection, MatchesExhaustiveOracle) {
  std::mt19937_64 gen(77);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 20; ++rep) {
    const oracle::Mat pi = oracle::random_memberships(gen, 30, 3);
    oracle::Mat u = embed(pi, gen);
    for (Eigen::Index i = 0; i < u.rows(); ++i)
      for (Eigen::Index j = 0; j < u.cols(); ++j) u(i, j) += 1e-3 * nd(gen);
    const auto want = oracle::best_triangle_subset(u);
    auto got = successive_projection(u, 3).indices;
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, want);
  }
}

TEST(SuccessiveProjection, DegenerateInputThrows) {
  DenseMatrix u(4, 2);
  u << 1, 2, 2, 4, 0.5, 1, 3, 6;  // rank one
  EXPECT_THROW(successive_projection(u, 2), GeometryError);
  EXPECT_THROW(successive_projection(u, 5), ArgumentError);
}

TEST(MembershipFromVertices, ExactRecovery) {
  std::mt19937_64 gen(12);
  const oracle::Mat pi = oracle::random_memberships(gen, 25, 3);
  const DenseMatrix u = embed(pi, gen);
  PureSubjectSet pure{{2, 0, 1}};
  const DenseMatrix est = membership_from_vertices(u, pure);
  // Column k belongs to pure subject S[k].
  for (int k = 0; k < 3; ++k) {
    EXPECT_LT((est.col(k) - pi.col(static_cast<Eigen::Index>(pure.indices[k]))).cwiseAbs().maxCoeff(),
              1e-8);
  }
  for (int k = 0; k < 3; ++k) {
    const Eigen::RowVectorXd row = est.row(static_cast<Eigen::Index>(pure.indices[k]));
    EXPECT_NEAR(row(k), 1.0, 1e-12);
    EXPECT_NEAR(row.sum(), 1.0, 1e-12);
  }
}

TEST(MembershipFromVertices, PerturbedMatchesConstrainedLeastSquares) {
  std::mt19937_64 gen(13);
  std::normal_distribution<double> nd;
  const oracle::Mat pi = oracle::random_memberships(gen, 40, 3);
  DenseMatrix u = embed(pi, gen);
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index j = 0; j < u.cols(); ++j) u(i, j) += 1e-4 * nd(gen);
  const PureSubjectSet pure{{0, 1, 2}};
  const DenseMatrix est = membership_from_vertices(u, pure);
  const oracle::Mat vertices = u.topRows(3);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const oracle::Vec w = oracle::constrained_ls(vertices, u.row(i).transpose());
    worst = std::max(worst, (est.row(i).transpose() - w).cwiseAbs().maxCoeff());
    EXPECT_NEAR(est.row(i).sum(), 1.0, 1e-12);
    EXPECT_GE(est.row(i).minCoeff(), 0.0);
  }
  EXPECT_LT(worst, 1e-2);
}

TEST(MembershipFromVertices, SingularVerticesThrow) {
  DenseMatrix u(3, 2);
  u << 1, 1, 2, 2, 0, 1;
  EXPECT_THROW(membership_from_vertices(u, PureSubjectSet{{0, 1}}), GeometryError);
  EXPECT_THROW(membership_from_vertices(u, PureSubjectSet{{0, 7}}), ArgumentError);
}
