#pragma once

#include "cogom/heteropca.hpp"
#include "cogom/linalg.hpp"
#include "cogom/simplex.hpp"

#include <cstddef>
#include <string>

namespace cogom {

/// How each data block's Gram matrix is estimated before fusion.
enum class GramEstimator {
  kHeteroPca,  // diagonal imputation (default)
  kPlain,      // raw A * A^T, the vanilla SVD baseline
};

struct FitConfig {
  std::size_t k = 3;
  double alpha = 0.0;
  HeteroPcaConfig hetero{};  // rank is overwritten with k
  double trunc_eps = 0.001;
  GramEstimator gram_estimator = GramEstimator::kHeteroPca;
  // Reject R entries other than 0 and 1. Entries must lie in [0, 1] either way.
  bool require_binary = true;

  void validate() const;
  HeteroPcaConfig hetero_for_rank() const;
};

/// Debiased per-block Gram estimates. G_X is empty when the covariate branch
/// is skipped (alpha == 0 or no covariate columns).
struct GramComponents {
  DenseMatrix response;
  DenseMatrix covariate;

  bool has_covariates() const { return covariate.size() > 0; }
};

struct FusedGram {
  DenseMatrix gram;
  SpectralDecomposition eig;
};

struct GomModel {
  DenseMatrix pi;                 // N x K, rows on the simplex
  DenseMatrix theta;              // J x K, truncated into [eps, 1 - eps]
  DenseMatrix theta_untruncated;  // J x K, before truncation
  DenseMatrix m;                  // W x K, empty when the covariate branch is skipped
  double alpha = 0.0;
  double trunc_eps = 0.001;
  PureSubjectSet pure_subjects;
  SpectralDecomposition eig;  // top-K of the fused Gram
};

/// Checks R (N x J, entries in [0, 1], optionally binary) against X (N x W).
void validate_inputs(const DenseMatrix& r, const DenseMatrix& x, bool require_binary);

/// Per-block Gram estimates. The covariate branch runs only when
/// `with_covariates` is set and X has columns.
GramComponents gram_components(const DenseMatrix& r, const DenseMatrix& x, std::size_t k,
                               GramEstimator estimator, const HeteroPcaConfig& hetero,
                               bool with_covariates);

/// G = G_R + alpha * G_X and its top-K eigenpairs.
FusedGram fuse(const GramComponents& components, double alpha, std::size_t k);

FusedGram fused_gram(const DenseMatrix& r, const DenseMatrix& x, const FitConfig& cfg);

/// Full estimator: fused eigenspace, vertex hunting, membership projection,
/// closed-form item/covariate regression, and truncation of Theta.
GomModel fit(const DenseMatrix& r, const DenseMatrix& x, const FitConfig& cfg);

/// Same as fit() with the per-block Gram estimates precomputed. Results are
/// identical to fit() when `components` came from gram_components() on the
/// same inputs.
GomModel fit_from_components(const DenseMatrix& r, const DenseMatrix& x,
                             const GramComponents& components, const FitConfig& cfg);

/// R_hat = Pi * Theta^T.
DenseMatrix predict(const GomModel& model);

enum class Identifiability {
  kIdentifiable,              // rank(D) = K
  kIdentifiableRankDeficient,  // rank K-1 without affine dependence
  kNotIdentifiable,            // rank K-1 with affine dependence
  kUndetermined,               // rank < K-1
};

struct IdentifiabilityReport {
  Identifiability verdict = Identifiability::kUndetermined;
  std::size_t rank = 0;
  // Non-identifiability additionally requires a subject with every
  // membership positive, which this check cannot observe.
  bool requires_interior_subject = false;
};

/// Classifies D = Theta^T Theta + alpha M^T M by its rank and, when rank is
/// K - 1, by whether a column of its first K - 1 rows is an affine
/// combination of the others.
IdentifiabilityReport check_identifiability(const DenseMatrix& d, double tol = 1e-8);

std::string to_string(Identifiability v);
std::string to_string(GramEstimator e);
GramEstimator gram_estimator_from_string(const std::string& name);

}  // namespace cogom
