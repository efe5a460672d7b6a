#include "cogom/estimator.hpp"

#include "cogom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cogom {

namespace {

constexpr double kEigenFloor = 1e-12;
constexpr double kNegativeEigenTol = 1e-8;

DenseMatrix block_gram(const DenseMatrix& a, GramEstimator estimator,
                       const HeteroPcaConfig& hetero) {
  DenseMatrix g = gram(a);
  if (estimator == GramEstimator::kPlain) return g;
  return hetero_pca(g, hetero).debiased_gram;
}

}  // namespace

void FitConfig::validate() const {
  if (k < 1) throw ArgumentError("K must be at least 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ArgumentError("alpha must be a finite non-negative number");
  }
  if (!(trunc_eps > 0.0 && trunc_eps < 0.5)) {
    throw ArgumentError("truncation epsilon must lie in (0, 0.5)");
  }
  hetero_for_rank().validate();
}

HeteroPcaConfig FitConfig::hetero_for_rank() const {
  HeteroPcaConfig h = hetero;
  h.rank = k;
  return h;
}

void validate_inputs(const DenseMatrix& r, const DenseMatrix& x, bool require_binary) {
  require_finite(r, "response matrix R");
  require_finite(x, "covariate matrix X");
  if (x.size() > 0 && x.rows() != r.rows()) {
    throw ShapeError("R has " + std::to_string(r.rows()) + " rows but X has " +
                     std::to_string(x.rows()));
  }
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      const double v = r(i, j);
      const bool ok = require_binary ? (v == 0.0 || v == 1.0) : (v >= 0.0 && v <= 1.0);
      if (!ok) {
        std::ostringstream msg;
        msg << "response entry at row " << i << ", column " << j << " is " << v
            << (require_binary ? "; expected 0 or 1" : "; expected a value in [0, 1]");
        throw ValidationError(msg.str());
      }
    }
  }
}

GramComponents gram_components(const DenseMatrix& r, const DenseMatrix& x, std::size_t k,
                               GramEstimator estimator, const HeteroPcaConfig& hetero,
                               bool with_covariates) {
  HeteroPcaConfig h = hetero;
  h.rank = k;
  GramComponents out;
  out.response = block_gram(r, estimator, h);
  if (with_covariates && x.cols() > 0) out.covariate = block_gram(x, estimator, h);
  return out;
}

FusedGram fuse(const GramComponents& components, double alpha, std::size_t k) {
  FusedGram out;
  if (alpha > 0.0 && components.has_covariates()) {
    out.gram = components.response + alpha * components.covariate;
  } else {
    out.gram = components.response;
  }
  out.eig = top_k_eigen(out.gram, k);
  return out;
}

FusedGram fused_gram(const DenseMatrix& r, const DenseMatrix& x, const FitConfig& cfg) {
  cfg.validate();
  validate_inputs(r, x, cfg.require_binary);
  const auto components =
      gram_components(r, x, cfg.k, cfg.gram_estimator, cfg.hetero, cfg.alpha > 0.0);
  return fuse(components, cfg.alpha, cfg.k);
}

GomModel fit(const DenseMatrix& r, const DenseMatrix& x, const FitConfig& cfg) {
  cfg.validate();
  validate_inputs(r, x, cfg.require_binary);
  const auto components =
      gram_components(r, x, cfg.k, cfg.gram_estimator, cfg.hetero, cfg.alpha > 0.0);
  return fit_from_components(r, x, components, cfg);
}

GomModel fit_from_components(const DenseMatrix& r, const DenseMatrix& x,
                             const GramComponents& components, const FitConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(r.rows());
  if (n <= cfg.k) {
    throw ArgumentError("need more subjects than profiles: N=" + std::to_string(n) +
                        ", K=" + std::to_string(cfg.k));
  }
  if (r.cols() < 1) throw ArgumentError("R needs at least one item column");
  if (components.response.rows() != r.rows()) {
    throw ShapeError("Gram components do not match the response matrix");
  }

  const FusedGram fused = fuse(components, cfg.alpha, cfg.k);
  const bool covariates = cfg.alpha > 0.0 && components.has_covariates();

  GomModel model;
  model.alpha = cfg.alpha;
  model.trunc_eps = cfg.trunc_eps;
  model.eig = fused.eig;

  Vector lambda = fused.eig.values;
  const double scale = std::abs(lambda(0));
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < -kNegativeEigenTol * std::max(scale, 1e-300) || !(scale > 0.0)) {
      std::ostringstream msg;
      msg << "eigenvalue " << i + 1 << " of the fused Gram is " << lambda(i)
          << "; the signal does not support K=" << cfg.k << ", try a smaller K";
      throw SignalError(msg.str());
    }
    lambda(i) = std::max(lambda(i), kEigenFloor);
  }

  const DenseMatrix& u = fused.eig.vectors;
  model.pure_subjects = successive_projection(u, cfg.k);
  model.pi = membership_from_vertices(u, model.pure_subjects);

  const Eigen::Index j = r.cols();
  const Eigen::Index w = covariates ? x.cols() : 0;
  DenseMatrix l(r.rows(), j + w);
  l.leftCols(j) = r;
  if (w > 0) l.rightCols(w) = std::sqrt(cfg.alpha) * x;

  const Vector sigma = lambda.cwiseSqrt();
  const DenseMatrix v = (l.transpose() * u) * sigma.cwiseInverse().asDiagonal();

  const Eigen::MatrixXd pitpi = model.pi.transpose() * model.pi;
  const Eigen::LLT<Eigen::MatrixXd> chol(pitpi);
  const double max_diag = pitpi.diagonal().maxCoeff();
  if (chol.info() != Eigen::Success ||
      chol.matrixLLT().diagonal().cwiseAbs2().minCoeff() <= 1e-14 * max_diag) {
    throw RankError("Pi^T Pi is singular; estimated memberships do not span K=" +
                    std::to_string(cfg.k) + " profiles");
  }
  // B = V Sigma U^T Pi (Pi^T Pi)^{-1}, computed as a solve against Pi^T Pi.
  const DenseMatrix projected = (v * sigma.asDiagonal()) * (u.transpose() * model.pi);
  const DenseMatrix coef = chol.solve(projected.transpose()).transpose();

  model.theta_untruncated = coef.topRows(j);
  model.theta = model.theta_untruncated.cwiseMax(cfg.trunc_eps).cwiseMin(1.0 - cfg.trunc_eps);
  if (w > 0) {
    model.m = coef.bottomRows(w) / std::sqrt(cfg.alpha);
  } else {
    model.m.resize(0, static_cast<Eigen::Index>(cfg.k));
  }
  return model;
}

DenseMatrix predict(const GomModel& model) { return model.pi * model.theta.transpose(); }

IdentifiabilityReport check_identifiability(const DenseMatrix& d, double tol) {
  require_symmetric(d);
  IdentifiabilityReport out;
  const Eigen::Index k = d.rows();
  if (k == 0) return out;

  const Vector singular = symmetric_eigenvalues(d).cwiseAbs();
  const double largest = singular.maxCoeff();
  for (Eigen::Index i = 0; i < k; ++i) {
    if (singular(i) > tol * largest) ++out.rank;
  }
  const auto kk = static_cast<std::size_t>(k);
  if (out.rank == kk) {
    out.verdict = Identifiability::kIdentifiable;
    return out;
  }
  if (out.rank + 1 < kk) {
    out.verdict = Identifiability::kUndetermined;
    return out;
  }

  // Rank K-1: does some column of the first K-1 rows equal sum a_i c_i with
  // sum a_i = 1 over the other columns?
  const Eigen::MatrixXd top = d.topRows(k - 1);
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  bool affine = false;
  for (Eigen::Index c = 0; c < k && !affine && k > 1; ++c) {
    Eigen::MatrixXd a(k, k - 1);
    Vector b(k);
    Eigen::Index col = 0;
    for (Eigen::Index o = 0; o < k; ++o) {
      if (o == c) continue;
      a.col(col).head(k - 1) = top.col(o);
      a(k - 1, col) = 1.0;
      ++col;
    }
    b.head(k - 1) = top.col(c);
    b(k - 1) = 1.0;
    const Vector coeffs = a.colPivHouseholderQr().solve(b);
    const double residual = (a * coeffs - b).norm();
    if (residual <= tol * scale) affine = true;
  }
  if (affine) {
    out.verdict = Identifiability::kNotIdentifiable;
    out.requires_interior_subject = true;
  } else {
    out.verdict = Identifiability::kIdentifiableRankDeficient;
  }
  return out;
}

std::string to_string(Identifiability v) {
  switch (v) {
    case Identifiability::kIdentifiable:
      return "Identifiable";
    case Identifiability::kIdentifiableRankDeficient:
      return "IdentifiableRankDeficient";
    case Identifiability::kNotIdentifiable:
      return "NotIdentifiable";
    case Identifiability::kUndetermined:
      return "Undetermined";
  }
  return "Undetermined";
}

std::string to_string(GramEstimator e) {
  return e == GramEstimator::kPlain ? "plain" : "heteropca";
}

GramEstimator gram_estimator_from_string(const std::string& name) {
  if (name == "heteropca") return GramEstimator::kHeteroPca;
  if (name == "plain") return GramEstimator::kPlain;
  throw ArgumentError("unknown Gram estimator '" + name + "' (expected heteropca or plain)");
}

}  // namespace cogom
