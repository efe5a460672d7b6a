#include "cogom/linalg.hpp"

#include "cogom/errors.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace cogom {

namespace {

using ColMatrix = Eigen::MatrixXd;

// Householder reduction of a symmetric matrix to tridiagonal form, kept around
// so eigenvalues and a subset of eigenvectors can be pulled from one reduction.
struct Tridiagonal {
  ColMatrix reflectors;  // dsytrd output: Householder vectors below the diagonal
  std::vector<double> diag;
  std::vector<double> offdiag;
  std::vector<double> tau;
};

Tridiagonal tridiagonalize(const DenseMatrix& s) {
  const auto n = static_cast<lapack_int>(s.rows());
  Tridiagonal t;
  t.reflectors = s;  // symmetric, so the row-major layout is irrelevant
  t.diag.resize(static_cast<std::size_t>(n));
  t.offdiag.resize(static_cast<std::size_t>(std::max<lapack_int>(n, 1)));
  t.tau.resize(static_cast<std::size_t>(std::max<lapack_int>(n - 1, 1)));
  const lapack_int info = LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'L', n, t.reflectors.data(), n,
                                         t.diag.data(), t.offdiag.data(), t.tau.data());
  if (info != 0) {
    throw ConvergenceError("tridiagonal reduction failed (dsytrd info=" + std::to_string(info) +
                           ")");
  }
  return t;
}

Vector tridiagonal_eigenvalues(const Tridiagonal& t) {
  const auto n = static_cast<lapack_int>(t.diag.size());
  std::vector<double> d = t.diag;
  std::vector<double> e = t.offdiag;
  const lapack_int info = LAPACKE_dsterf(n, d.data(), e.data());
  if (info != 0) {
    throw ConvergenceError("tridiagonal eigenvalue iteration failed (dsterf info=" +
                           std::to_string(info) + ")");
  }
  Vector out(n);
  for (lapack_int i = 0; i < n; ++i) out(i) = d[static_cast<std::size_t>(n - 1 - i)];
  return out;
}

void apply_sign_convention(DenseMatrix& u) {
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
      const double a = std::abs(u(r, c));
      if (a > best) {
        best = a;
        arg = r;
      }
    }
    if (u(arg, c) < 0.0) u.col(c) *= -1.0;
  }
}

SpectralDecomposition top_k_from_tridiagonal(const DenseMatrix& s, const Tridiagonal& t,
                                             std::size_t k, const NumericSettings& settings) {
  const auto n = static_cast<lapack_int>(s.rows());
  const auto kk = static_cast<lapack_int>(k);
  std::vector<double> d = t.diag;
  std::vector<double> e = t.offdiag;
  std::vector<double> w(static_cast<std::size_t>(n));
  ColMatrix z(n, kk);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(std::max<lapack_int>(kk, 1)));
  lapack_int found = 0;
  lapack_int tryrac = 1;
  lapack_int info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0,
                                   n - kk + 1, n, &found, w.data(), z.data(), n, kk,
                                   support.data(), &tryrac);
  if (info != 0 || found != kk) {
    throw ConvergenceError("MRRR eigenvector computation failed (dstemr info=" +
                           std::to_string(info) + ", found " + std::to_string(found) + " of " +
                           std::to_string(kk) + ")");
  }
  ColMatrix reflectors = t.reflectors;
  std::vector<double> tau = t.tau;
  info = LAPACKE_dormtr(LAPACK_COL_MAJOR, 'L', 'L', 'N', n, kk, reflectors.data(), n, tau.data(),
                        z.data(), n);
  if (info != 0) {
    throw ConvergenceError("eigenvector back-transformation failed (dormtr info=" +
                           std::to_string(info) + ")");
  }

  SpectralDecomposition out;
  out.vectors.resize(n, kk);
  out.values.resize(kk);
  // dstemr returns ascending order; flip to non-increasing.
  for (lapack_int j = 0; j < kk; ++j) {
    out.values(j) = w[static_cast<std::size_t>(kk - 1 - j)];
    out.vectors.col(j) = z.col(kk - 1 - j);
  }
  apply_sign_convention(out.vectors);

  const double scale = s.norm();
  const DenseMatrix residual = s * out.vectors - out.vectors * out.values.asDiagonal();
  for (lapack_int j = 0; j < kk; ++j) {
    const double r = residual.col(j).norm();
    if (r > settings.residual_tol * std::max(scale, 1e-300)) {
      std::ostringstream msg;
      msg << "eigenpair " << j << " did not converge: residual " << r << " exceeds "
          << settings.residual_tol << " * ||S||_F = " << settings.residual_tol * scale;
      throw ConvergenceError(msg.str());
    }
  }
  return out;
}

}  // namespace

void require_finite(const DenseMatrix& a, const char* name) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (!std::isfinite(a(i, j))) {
        std::ostringstream msg;
        msg << name << " has a non-finite entry at (" << i << ", " << j << ")";
        throw ValidationError(msg.str());
      }
    }
  }
}

void require_symmetric(const DenseMatrix& s, const NumericSettings& settings) {
  if (s.rows() != s.cols()) {
    throw ShapeError("expected a square matrix, got " + std::to_string(s.rows()) + "x" +
                     std::to_string(s.cols()));
  }
  require_finite(s, "symmetric input");
  const double scale = std::max(1.0, s.size() > 0 ? s.cwiseAbs().maxCoeff() : 0.0);
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < s.cols(); ++j) {
      if (std::abs(s(i, j) - s(j, i)) > settings.symmetry_tol * scale) {
        std::ostringstream msg;
        msg << "matrix is not symmetric at (" << i << ", " << j << ")";
        throw ShapeError(msg.str());
      }
    }
  }
}

SpectralDecomposition top_k_eigen(const DenseMatrix& s, std::size_t k,
                                  const NumericSettings& settings) {
  require_symmetric(s, settings);
  if (k < 1 || k > static_cast<std::size_t>(s.rows())) {
    throw ArgumentError("rank K=" + std::to_string(k) + " out of range [1, " +
                        std::to_string(s.rows()) + "]");
  }
  return top_k_from_tridiagonal(s, tridiagonalize(s), k, settings);
}

EigenWithSpectrum top_k_eigen_with_spectrum(const DenseMatrix& s, std::size_t k,
                                            const NumericSettings& settings) {
  require_symmetric(s, settings);
  if (k < 1 || k > static_cast<std::size_t>(s.rows())) {
    throw ArgumentError("rank K=" + std::to_string(k) + " out of range [1, " +
                        std::to_string(s.rows()) + "]");
  }
  const Tridiagonal t = tridiagonalize(s);
  return {top_k_from_tridiagonal(s, t, k, settings), tridiagonal_eigenvalues(t)};
}

Vector symmetric_eigenvalues(const DenseMatrix& s, const NumericSettings& settings) {
  require_symmetric(s, settings);
  if (s.rows() == 0) return Vector(0);
  return tridiagonal_eigenvalues(tridiagonalize(s));
}

double symmetric_spectral_norm(const DenseMatrix& s, const NumericSettings& settings) {
  const Vector values = symmetric_eigenvalues(s, settings);
  if (values.size() == 0) return 0.0;
  return std::max(std::abs(values(0)), std::abs(values(values.size() - 1)));
}

DenseMatrix gram(const DenseMatrix& a) {
  DenseMatrix g = a * a.transpose();
  return (0.5 * (g + g.transpose())).eval();
}

DenseMatrix hollow(const DenseMatrix& a) {
  if (a.rows() != a.cols()) {
    throw ShapeError("hollow expects a square matrix, got " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()));
  }
  DenseMatrix out = a;
  out.diagonal().setZero();
  return out;
}

DenseMatrix reconstruct(const SpectralDecomposition& eig) {
  DenseMatrix out = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
  return (0.5 * (out + out.transpose())).eval();
}

DenseMatrix low_rank_approx(const DenseMatrix& s, std::size_t k, const NumericSettings& settings) {
  return reconstruct(top_k_eigen(s, k, settings));
}

double two_to_inf_norm(const DenseMatrix& a) {
  if (a.size() == 0) return 0.0;
  return a.rowwise().norm().maxCoeff();
}

MatrixNorms norms(const DenseMatrix& a) {
  MatrixNorms out;
  if (a.size() == 0) return out;
  out.frobenius = a.norm();
  out.two_to_inf = two_to_inf_norm(a);
  out.entry_inf = a.cwiseAbs().maxCoeff();
  // Use the smaller Gram so the eigenproblem stays small.
  const DenseMatrix g = a.rows() <= a.cols() ? gram(a) : gram(a.transpose());
  out.spectral = std::sqrt(std::max(0.0, top_k_eigen(g, 1).values(0)));
  return out;
}

}  // namespace cogom
