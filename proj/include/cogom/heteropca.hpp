#pragma once

#include "cogom/linalg.hpp"

#include <cstddef>

namespace cogom {

struct HeteroPcaConfig {
  std::size_t rank = 1;
  std::size_t max_iters = 10;
  double tol = 1e-6;
  // Stop on ||N(t) - N(t-1)|| < tol instead of the scale-free
  // ||N(t) - N(t-1)|| / max(||N(t-1)||, 1) < tol.
  bool absolute_change = false;

  void validate() const;
};

struct HeteroPcaResult {
  DenseMatrix debiased_gram;
  SpectralDecomposition decomposition;  // top-`rank` pairs of debiased_gram
  std::size_t iters_run = 0;
  double final_change = 0.0;
};

/// Heteroskedastic PCA: start from the hollowed Gram and repeatedly replace
/// its diagonal with the diagonal of the current rank-K approximation.
/// Off-diagonal entries of the input are never modified.
///
/// Runs at most `max_iters` diagonal updates and stops early once the
/// spectral norm of the update (which is diagonal, so it is the largest
/// absolute diagonal change) falls below the tolerance.
HeteroPcaResult hetero_pca(const DenseMatrix& g, const HeteroPcaConfig& cfg,
                           const NumericSettings& settings = {});

}  // namespace cogom
