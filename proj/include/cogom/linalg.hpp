#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace cogom {

/// Row-major dense matrix used for every data and parameter matrix.
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Tolerances shared by the linear algebra routines.
struct NumericSettings {
  double symmetry_tol = 1e-8;  // max |S_ij - S_ji| relative to max(1, max |S|)
  double residual_tol = 1e-8;  // per-pair ||S u - lambda u|| relative to ||S||_F
};

/// Top-K eigenpairs of a symmetric matrix. Eigenvalues are non-increasing and
/// each eigenvector has its largest-magnitude entry non-negative.
struct SpectralDecomposition {
  DenseMatrix vectors;  // n x K, orthonormal columns
  Vector values;        // K, non-increasing
};

struct MatrixNorms {
  double frobenius = 0.0;
  double spectral = 0.0;
  double two_to_inf = 0.0;  // max row l2 norm
  double entry_inf = 0.0;   // max |a_ij|
};

/// Throws ValidationError if any entry is NaN or infinite.
void require_finite(const DenseMatrix& a, const char* name);

/// Throws ShapeError unless `s` is square and symmetric within tolerance.
void require_symmetric(const DenseMatrix& s, const NumericSettings& settings = {});

/// K largest-algebraic eigenpairs of a dense symmetric matrix.
///
/// The matrix is reduced to tridiagonal form and only the K requested
/// eigenvectors are computed (MRRR), so cost is dominated by the reduction.
/// Equal eigenvalues come out in the solver's fixed order; the result is
/// bit-identical across calls on the same input.
SpectralDecomposition top_k_eigen(const DenseMatrix& s, std::size_t k,
                                  const NumericSettings& settings = {});

/// Top-K eigenpairs together with the full (non-increasing) spectrum, from a
/// single tridiagonal reduction.
struct EigenWithSpectrum {
  SpectralDecomposition top;
  Vector spectrum;
};
EigenWithSpectrum top_k_eigen_with_spectrum(const DenseMatrix& s, std::size_t k,
                                            const NumericSettings& settings = {});

/// All eigenvalues of a dense symmetric matrix, non-increasing.
Vector symmetric_eigenvalues(const DenseMatrix& s, const NumericSettings& settings = {});

/// max |lambda| of a dense symmetric matrix.
double symmetric_spectral_norm(const DenseMatrix& s, const NumericSettings& settings = {});

/// A * A^T, symmetrized after the product.
DenseMatrix gram(const DenseMatrix& a);

/// Copy of `a` with the diagonal zeroed.
DenseMatrix hollow(const DenseMatrix& a);

/// sum_{i<=K} lambda_i u_i u_i^T from top_k_eigen.
DenseMatrix low_rank_approx(const DenseMatrix& s, std::size_t k,
                            const NumericSettings& settings = {});

/// Reconstruction from an existing decomposition, exactly symmetric.
DenseMatrix reconstruct(const SpectralDecomposition& eig);

MatrixNorms norms(const DenseMatrix& a);

double two_to_inf_norm(const DenseMatrix& a);

}  // namespace cogom
