#pragma once

#include "cogom/linalg.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace cogom {

/// Ground-truth or estimated factor set. `m` may be empty.
struct Factors {
  DenseMatrix pi;
  DenseMatrix theta;
  DenseMatrix m;
};

struct AlignedError {
  // permutation[a] = truth column matched to estimated column a
  std::vector<std::size_t> permutation;
  double mae_pi = 0.0;
  double mae_theta = 0.0;
  std::optional<double> mae_m;  // present when both sides carry M
  double two_to_inf_pi = 0.0;
  double max_abs_pi = 0.0;
  double max_abs_theta = 0.0;
};

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method).
/// Returns assignment[row] = column. Ties go to the lexicographically
/// smallest optimum, so the answer does not depend on search order.
std::vector<std::size_t> optimal_assignment(const Eigen::MatrixXd& cost);

/// Labels estimated profiles against the truth by the column permutation that
/// minimizes mean |Pi_hat P - Pi|, then reports every error under it.
AlignedError align(const Factors& est, const Factors& truth);

/// Applies a permutation from align(): column a of `est` moves to column
/// permutation[a].
DenseMatrix permute_columns(const DenseMatrix& est, const std::vector<std::size_t>& permutation);

struct SubspaceDistance {
  double projector = 0.0;   // ||U1 U1^T - U2 U2^T|| (spectral)
  double two_to_inf = 0.0;  // ||U1 Z - U2||_{2,inf}, Z the Procrustes rotation
};

/// Orthogonal Z minimizing ||U1 Z - U2||_F (from the SVD of U1^T U2).
Eigen::MatrixXd procrustes_rotation(const DenseMatrix& u1, const DenseMatrix& u2);

/// Both inputs must share a shape and have orthonormal columns.
SubspaceDistance subspace_distance(const DenseMatrix& u1, const DenseMatrix& u2);

double mean_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

/// Linear-interpolation quantile; q in [0, 1]. NaNs are dropped. Returns NaN
/// for an empty sample.
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);

}  // namespace cogom
