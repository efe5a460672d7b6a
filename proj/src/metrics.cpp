#include "cogom/metrics.hpp"

#include "cogom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace cogom {

namespace {

constexpr double kOrthonormalTol = 1e-6;

void require_orthonormal(const DenseMatrix& u, const char* name) {
  const Eigen::MatrixXd gram_u = u.transpose() * u;
  const double dev =
      (gram_u - Eigen::MatrixXd::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
  if (dev > kOrthonormalTol) {
    throw ValidationError(std::string(name) + " does not have orthonormal columns (max |U^T U - I| = " +
                          std::to_string(dev) + ")");
  }
}

std::vector<std::size_t> hungarian(const Eigen::MatrixXd& cost) {
  const auto n = static_cast<std::size_t>(cost.rows());
  if (n == 0) return {};
  // Shortest augmenting path with potentials; rows/cols are 1-based here and
  // index 0 is the virtual column.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> row_pot(n + 1, 0.0), col_pot(n + 1, 0.0);
  std::vector<std::size_t> col_match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    col_match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = col_match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1),
                                static_cast<Eigen::Index>(j - 1)) -
                           row_pot[i0] - col_pot[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          row_pot[col_match[j]] += delta;
          col_pot[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      col_match[j0] = col_match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[col_match[j] - 1] = j - 1;
  return assignment;
}

double assignment_cost(const Eigen::MatrixXd& cost, const std::vector<std::size_t>& a) {
  double c = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    c += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a[i]));
  }
  return c;
}

}  // namespace

std::vector<std::size_t> optimal_assignment(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols()) throw ShapeError("assignment cost matrix must be square");
  const Eigen::Index n = cost.rows();
  if (n == 0) return {};
  if (!cost.allFinite()) throw ValidationError("assignment cost matrix has non-finite entries");
  const std::vector<std::size_t> any = hungarian(cost);
  const double best = assignment_cost(cost, any);
  const double slack = 1e-12 * (std::abs(best) + cost.cwiseAbs().maxCoeff() + 1e-300);

  // Lowest-index tie-break: give each row, in order, the smallest column that
  // still admits an optimal completion of the remaining rows.
  std::vector<std::size_t> out(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> rows_left(static_cast<std::size_t>(n)), cols_left;
  std::iota(rows_left.begin(), rows_left.end(), Eigen::Index{0});
  cols_left = rows_left;
  double fixed = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    rows_left.erase(rows_left.begin());
    const auto m = static_cast<Eigen::Index>(rows_left.size());
    for (std::size_t ci = 0; ci < cols_left.size(); ++ci) {
      const Eigen::Index c = cols_left[ci];
      double total = fixed + cost(r, c);
      if (m > 0) {
        Eigen::MatrixXd sub(m, m);
        for (Eigen::Index a = 0; a < m; ++a) {
          for (Eigen::Index b = 0, bb = 0; b < m + 1; ++b) {
            if (static_cast<std::size_t>(b) == ci) continue;
            sub(a, bb++) = cost(rows_left[static_cast<std::size_t>(a)], cols_left[static_cast<std::size_t>(b)]);
          }
        }
        total += assignment_cost(sub, hungarian(sub));
      }
      if (total <= best + slack) {
        out[static_cast<std::size_t>(r)] = static_cast<std::size_t>(c);
        fixed += cost(r, c);
        cols_left.erase(cols_left.begin() + static_cast<std::ptrdiff_t>(ci));
        break;
      }
    }
  }
  return out;
}

double mean_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("mean absolute difference needs equal shapes");
  }
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().mean();
}

DenseMatrix permute_columns(const DenseMatrix& est, const std::vector<std::size_t>& permutation) {
  if (static_cast<Eigen::Index>(permutation.size()) != est.cols()) {
    throw ShapeError("permutation length does not match the column count");
  }
  DenseMatrix out(est.rows(), est.cols());
  for (std::size_t a = 0; a < permutation.size(); ++a) {
    out.col(static_cast<Eigen::Index>(permutation[a])) = est.col(static_cast<Eigen::Index>(a));
  }
  return out;
}

AlignedError align(const Factors& est, const Factors& truth) {
  if (est.pi.rows() != truth.pi.rows() || est.pi.cols() != truth.pi.cols()) {
    throw ShapeError("Pi shapes differ: estimate " + std::to_string(est.pi.rows()) + "x" +
                     std::to_string(est.pi.cols()) + ", truth " +
                     std::to_string(truth.pi.rows()) + "x" + std::to_string(truth.pi.cols()));
  }
  if (est.theta.rows() != truth.theta.rows() || est.theta.cols() != truth.theta.cols()) {
    throw ShapeError("Theta shapes differ between estimate and truth");
  }
  const bool with_m = est.m.size() > 0 && truth.m.size() > 0;
  if (with_m && (est.m.rows() != truth.m.rows() || est.m.cols() != truth.m.cols())) {
    throw ShapeError("M shapes differ between estimate and truth");
  }

  const Eigen::Index k = est.pi.cols();
  Eigen::MatrixXd cost(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      cost(a, b) = (est.pi.col(a) - truth.pi.col(b)).cwiseAbs().mean();
    }
  }

  AlignedError out;
  out.permutation = optimal_assignment(cost);
  const DenseMatrix pi = permute_columns(est.pi, out.permutation);
  const DenseMatrix theta = permute_columns(est.theta, out.permutation);
  out.mae_pi = mean_abs_diff(pi, truth.pi);
  out.mae_theta = mean_abs_diff(theta, truth.theta);
  out.two_to_inf_pi = two_to_inf_norm(pi - truth.pi);
  out.max_abs_pi = pi.size() > 0 ? (pi - truth.pi).cwiseAbs().maxCoeff() : 0.0;
  out.max_abs_theta = theta.size() > 0 ? (theta - truth.theta).cwiseAbs().maxCoeff() : 0.0;
  if (with_m) out.mae_m = mean_abs_diff(permute_columns(est.m, out.permutation), truth.m);
  return out;
}

Eigen::MatrixXd procrustes_rotation(const DenseMatrix& u1, const DenseMatrix& u2) {
  const Eigen::MatrixXd cross = u1.transpose() * u2;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

SubspaceDistance subspace_distance(const DenseMatrix& u1, const DenseMatrix& u2) {
  if (u1.rows() != u2.rows() || u1.cols() != u2.cols()) {
    throw ShapeError("subspace distance needs equally shaped bases");
  }
  require_orthonormal(u1, "U1");
  require_orthonormal(u2, "U2");
  SubspaceDistance out;
  if (u1.cols() == 0) return out;
  // Largest principal-angle sine: ||(I - U1 U1^T) U2||.
  const DenseMatrix residual = u2 - u1 * (u1.transpose() * u2);
  const Eigen::MatrixXd residual_col = residual;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual_col);
  out.projector = svd.singularValues()(0);
  const Eigen::MatrixXd z = procrustes_rotation(u1, u2);
  out.two_to_inf = two_to_inf_norm(u1 * z - u2);
  return out;
}

double quantile(std::vector<double> values, double q) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return std::isnan(v); }),
               values.end());
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

}  // namespace cogom
