#pragma once

#include "cogom/estimator.hpp"
#include "cogom/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace cogom {

struct AlphaRange {
  double min = 0.0;
  double max = 0.0;
};

/// alpha_min = (l_K(G_R) - l_{K+1}(G_R)) / l_1(G_X),
/// alpha_max = l_1(G_R) / (l_K(G_X) - l_{K+1}(G_X)).
/// Both spectra must be non-increasing with at least K+1 entries.
AlphaRange alpha_range(const Vector& response_eigs, const Vector& covariate_eigs, std::size_t k);

/// {0} followed by `count` geometrically spaced points between
/// max(alpha_min, 1e-4) and alpha_max.
std::vector<double> default_alpha_grid(const AlphaRange& range, std::size_t count = 20);

/// Computes the debiased Grams of the full data and returns the default grid.
std::vector<double> default_alpha_grid_for(const DenseMatrix& r, const DenseMatrix& x,
                                           const FitConfig& cfg, std::size_t count = 20);

/// Fold label for every entry of the N x (J + W) concatenation [R | X],
/// stored row-major. Fold sizes differ by at most one.
struct FoldPartition {
  std::size_t folds = 0;
  std::size_t rows = 0;
  std::size_t response_cols = 0;
  std::size_t covariate_cols = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> labels;

  std::size_t cols() const { return response_cols + covariate_cols; }
  std::uint32_t label(std::size_t row, std::size_t col) const { return labels[row * cols() + col]; }
};

FoldPartition partition_entries(std::size_t n, std::size_t j, std::size_t w, std::size_t folds,
                                std::uint64_t seed);

struct MaskedData {
  DenseMatrix r;
  DenseMatrix x;
};

/// Zeroes every entry in `fold`. With `ipw`, retained entries are scaled by
/// folds / (folds - 1).
MaskedData mask_fold(const DenseMatrix& r, const DenseMatrix& x, const FoldPartition& partition,
                     std::size_t fold, bool ipw);

/// Mean |R - R_hat| over the R entries of `fold`; NaN if the fold holds none.
double fold_mae(const DenseMatrix& r, const DenseMatrix& r_hat, const FoldPartition& partition,
                std::size_t fold);

/// Loess: local polynomial regression of the given degree (0..2) with
/// tricube weights over the nearest floor(span * n) points. span == 0
/// returns `ys` unchanged.
std::vector<double> smooth_curve(const std::vector<double>& xs, const std::vector<double>& ys,
                                 double span = 0.75, int degree = 2);

/// Abscissa for smoothing the CV curve: the position of each alpha in the
/// sorted grid (even spacing for the default geometric grid) or alpha itself.
enum class SmoothingAxis { kGridRank, kAlpha };

struct CvConfig {
  FitConfig fit{};  // alpha is ignored; each grid value is substituted
  std::vector<double> alphas;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  bool ipw = false;
  double smoothing_span = 0.75;
  int smoothing_degree = 2;
  SmoothingAxis smoothing_axis = SmoothingAxis::kGridRank;
  std::size_t threads = 1;
};

struct CvCellFailure {
  std::size_t alpha_index = 0;
  std::size_t fold = 0;
  std::string message;
};

struct CvReport {
  std::vector<double> alphas;  // in the caller's order
  DenseMatrix mae;             // alphas x folds, NaN for failed cells
  std::vector<double> mean_mae;   // NaN when every fold failed
  std::vector<double> smoothed;   // NaN for excluded alphas
  double selected_alpha = 0.0;
  std::size_t selected_index = 0;
  std::size_t folds = 0;
  std::uint64_t seed = 0;
  std::vector<CvCellFailure> failures;
};

/// Masked k-fold selection of the balance parameter: every (alpha, fold) cell
/// refits on the masked data and scores the held-out response entries; the
/// per-alpha mean is smoothed along the grid and minimized (ties to the smaller
/// alpha).
CvReport cross_validate_alpha(const DenseMatrix& r, const DenseMatrix& x, const CvConfig& cfg);

struct ParallelAnalysisResult {
  std::size_t k = 0;
  std::vector<double> observed;    // eigenvalues of the centred Gram / N
  std::vector<double> thresholds;  // per-rank null quantiles
};

/// Horn's parallel analysis: the number of leading eigenvalues of the
/// column-centred Gram / N that exceed the `q` quantile of the same rank
/// under independent column permutations.
ParallelAnalysisResult parallel_analysis(const DenseMatrix& r, std::size_t n_perm, double q,
                                         std::uint64_t seed);

}  // namespace cogom
