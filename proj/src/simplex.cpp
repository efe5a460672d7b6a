#include "cogom/simplex.hpp"

#include "cogom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

namespace cogom {

namespace {

constexpr double kMaxVertexCondition = 1e12;
// Rows whose residual norm falls this far below the initial maximum are
// treated as zero; the remaining geometry cannot support another vertex.
constexpr double kDegenerateNormRatio = 1e-12;

}  // namespace

PureSubjectSet successive_projection(const DenseMatrix& u, std::size_t k) {
  const auto n = static_cast<std::size_t>(u.rows());
  if (k < 1 || k > n) {
    throw ArgumentError("successive projection needs 1 <= K <= N, got K=" + std::to_string(k) +
                        ", N=" + std::to_string(n));
  }
  if (static_cast<std::size_t>(u.cols()) != k) {
    throw ShapeError("successive projection expects " + std::to_string(k) + " columns, got " +
                     std::to_string(u.cols()));
  }

  DenseMatrix y = u;
  PureSubjectSet out;
  out.indices.reserve(k);
  double first_max = 0.0;
  for (std::size_t step = 0; step < k; ++step) {
    const Vector sq = y.rowwise().squaredNorm();
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < sq.size(); ++i) {
      if (sq(i) > sq(arg)) arg = i;
    }
    const double best = std::sqrt(sq(arg));
    if (step == 0) first_max = best;
    if (!(best > 0.0) || best <= kDegenerateNormRatio * first_max) {
      throw GeometryError("successive projection found no remaining vertex at step " +
                          std::to_string(step + 1) + " of " + std::to_string(k) +
                          "; the embedding is rank deficient");
    }
    out.indices.push_back(static_cast<std::size_t>(arg));
    const Vector dir = y.row(arg).transpose() / best;
    y -= (y * dir) * dir.transpose();
  }
  return out;
}

Vector project_to_simplex(const Vector& v) {
  const Eigen::Index k = v.size();
  if (k == 0) throw ArgumentError("cannot project an empty vector onto the simplex");
  if (!v.allFinite()) throw ValidationError("cannot project a non-finite vector onto the simplex");

  std::vector<double> sorted(v.data(), v.data() + k);
  std::stable_sort(sorted.begin(), sorted.end(), std::greater<>());

  // Largest support size whose threshold keeps every supported entry positive.
  double cumsum = 0.0;
  double tau = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    cumsum += sorted[static_cast<std::size_t>(j)];
    const double candidate = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (sorted[static_cast<std::size_t>(j)] > candidate) tau = candidate;
  }
  Vector w = (v.array() - tau).cwiseMax(0.0).matrix();
  // Absorb rounding in the sum.
  const double total = w.sum();
  if (total > 0.0) w /= total;
  return w;
}

DenseMatrix membership_from_vertices(const DenseMatrix& u, const PureSubjectSet& pure) {
  const auto k = static_cast<Eigen::Index>(pure.size());
  if (k == 0 || u.cols() != k) {
    throw ShapeError("membership recovery needs U with " + std::to_string(pure.size()) +
                     " columns, got " + std::to_string(u.cols()));
  }
  DenseMatrix vertices(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    const auto idx = pure.indices[static_cast<std::size_t>(r)];
    if (idx >= static_cast<std::size_t>(u.rows())) {
      throw ArgumentError("pure subject index " + std::to_string(idx) + " out of range");
    }
    vertices.row(r) = u.row(static_cast<Eigen::Index>(idx));
  }

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(vertices);
  const double rcond = lu.rcond();
  if (!(rcond > 1.0 / kMaxVertexCondition)) {
    throw GeometryError("vertex matrix is singular (estimated condition number " +
                        std::to_string(rcond > 0.0 ? 1.0 / rcond : INFINITY) +
                        "); try a smaller K");
  }
  const Eigen::MatrixXd inverse = lu.inverse();
  DenseMatrix pi = u * inverse;
  for (Eigen::Index i = 0; i < pi.rows(); ++i) {
    pi.row(i) = project_to_simplex(pi.row(i).transpose()).transpose();
  }
  return pi;
}

}  // namespace cogom
