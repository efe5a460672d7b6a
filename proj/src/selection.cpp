#include "cogom/selection.hpp"

#include "cogom/errors.hpp"
#include "cogom/metrics.hpp"
#include "cogom/parallel.hpp"
#include "cogom/random.hpp"

#include <boost/random/uniform_int_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <tuple>
#include <sstream>

namespace cogom {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMinGridAlpha = 1e-4;

void require_non_increasing(const Vector& v, const char* name) {
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(i - 1) + 1e-12 * std::max(1.0, std::abs(v(i - 1)))) {
      throw ArgumentError(std::string(name) + " eigenvalues must be non-increasing");
    }
  }
}

template <typename T>
void shuffle_in_place(std::vector<T>& items, CounterRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(items[i - 1], items[pick(rng)]);
  }
}

}  // namespace

AlphaRange alpha_range(const Vector& response_eigs, const Vector& covariate_eigs, std::size_t k) {
  const auto need = static_cast<Eigen::Index>(k + 1);
  if (k < 1 || response_eigs.size() < need || covariate_eigs.size() < need) {
    throw ArgumentError("alpha range needs at least K+1 eigenvalues of each Gram");
  }
  require_non_increasing(response_eigs, "G_R");
  require_non_increasing(covariate_eigs, "G_X");
  const auto kk = static_cast<Eigen::Index>(k);
  const double top_x = covariate_eigs(0);
  const double gap_x = covariate_eigs(kk - 1) - covariate_eigs(kk);
  if (!(top_x > 0.0) || !(gap_x > 0.0)) {
    std::ostringstream msg;
    msg << "covariate spectrum is degenerate (lambda_1 = " << top_x << ", gap at K = " << gap_x
        << "); supply a manual alpha grid";
    throw DegenerateSpectrumError(msg.str());
  }
  AlphaRange out;
  out.min = (response_eigs(kk - 1) - response_eigs(kk)) / top_x;
  out.max = response_eigs(0) / gap_x;
  return out;
}

std::vector<double> default_alpha_grid(const AlphaRange& range, std::size_t count) {
  std::vector<double> grid{0.0};
  const double lo = std::max(range.min, kMinGridAlpha);
  const double hi = range.max;
  if (count == 0) return grid;
  if (count == 1 || !(hi > lo)) {
    grid.push_back(lo);
    return grid;
  }
  const double ratio = std::log(hi / lo);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    grid.push_back(i + 1 == count ? hi : lo * std::exp(ratio * t));
  }
  return grid;
}

std::vector<double> default_alpha_grid_for(const DenseMatrix& r, const DenseMatrix& x,
                                           const FitConfig& cfg, std::size_t count) {
  cfg.validate();
  if (x.cols() == 0) throw ArgumentError("covariates required to derive an alpha grid");
  validate_inputs(r, x, cfg.require_binary);
  const auto components = gram_components(r, x, cfg.k, cfg.gram_estimator, cfg.hetero, true);
  return default_alpha_grid(alpha_range(symmetric_eigenvalues(components.response),
                                        symmetric_eigenvalues(components.covariate), cfg.k),
                            count);
}

FoldPartition partition_entries(std::size_t n, std::size_t j, std::size_t w, std::size_t folds,
                                std::uint64_t seed) {
  if (folds < 2) throw ArgumentError("cross-validation needs at least 2 folds");
  const std::size_t total = n * (j + w);
  if (folds > total) {
    throw ArgumentError("cannot split " + std::to_string(total) + " entries into " +
                        std::to_string(folds) + " folds");
  }
  FoldPartition out;
  out.folds = folds;
  out.rows = n;
  out.response_cols = j;
  out.covariate_cols = w;
  out.seed = seed;
  out.labels.resize(total);
  for (std::size_t i = 0; i < total; ++i) out.labels[i] = static_cast<std::uint32_t>(i % folds);
  CounterRng rng(seed, "folds");
  shuffle_in_place(out.labels, rng);
  return out;
}

MaskedData mask_fold(const DenseMatrix& r, const DenseMatrix& x, const FoldPartition& partition,
                     std::size_t fold, bool ipw) {
  const double keep = ipw ? static_cast<double>(partition.folds) /
                                static_cast<double>(partition.folds - 1)
                          : 1.0;
  MaskedData out{r, x};
  const std::size_t j = partition.response_cols;
  for (std::size_t a = 0; a < partition.rows; ++a) {
    const auto ra = static_cast<Eigen::Index>(a);
    for (std::size_t b = 0; b < partition.cols(); ++b) {
      const bool masked = partition.label(a, b) == fold;
      double& entry = b < j ? out.r(ra, static_cast<Eigen::Index>(b))
                            : out.x(ra, static_cast<Eigen::Index>(b - j));
      entry = masked ? 0.0 : entry * keep;
    }
  }
  return out;
}

double fold_mae(const DenseMatrix& r, const DenseMatrix& r_hat, const FoldPartition& partition,
                std::size_t fold) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t a = 0; a < partition.rows; ++a) {
    for (std::size_t b = 0; b < partition.response_cols; ++b) {
      if (partition.label(a, b) != fold) continue;
      const auto ra = static_cast<Eigen::Index>(a);
      const auto cb = static_cast<Eigen::Index>(b);
      total += std::abs(r(ra, cb) - r_hat(ra, cb));
      ++count;
    }
  }
  return count == 0 ? kNaN : total / static_cast<double>(count);
}

std::vector<double> smooth_curve(const std::vector<double>& xs, const std::vector<double>& ys,
                                 double span, int degree) {
  if (xs.size() != ys.size()) throw ArgumentError("smoothing needs equally long xs and ys");
  if (!(span >= 0.0)) throw ArgumentError("smoothing span must be non-negative");
  if (degree < 0 || degree > 2) throw ArgumentError("smoothing degree must be 0, 1 or 2");
  if (span == 0.0) return ys;
  const std::size_t n = xs.size();
  if (n < 2) throw ArgumentError("smoothing needs at least two points");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(xs[i] > xs[i - 1])) throw ArgumentError("smoothing xs must be strictly increasing");
  }

  const auto q = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(span * n)), 2, n);
  std::vector<double> out(n);
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < n; ++t) dist[t] = std::abs(xs[t] - xs[i]);
    std::vector<double> sorted = dist;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(q - 1),
                     sorted.end());
    double h = sorted[q - 1];
    // Spans beyond the data widen the window proportionally.
    if (span > 1.0) h *= span;

    std::vector<std::size_t> support;
    std::vector<double> wts;
    for (std::size_t t = 0; t < n; ++t) {
      const double u = dist[t] / h;
      if (u < 1.0) {
        const double c = 1.0 - u * u * u;
        support.push_back(t);
        wts.push_back(c * c * c);
      }
    }
    // Weighted polynomial in the centred, scaled coordinate (x - x_i) / h; the
    // fitted value at x_i is the intercept. Too few support points lower the
    // degree.
    const auto m = static_cast<Eigen::Index>(support.size());
    const int deg = std::min<int>(degree, static_cast<int>(m) - 1);
    Eigen::MatrixXd design(m, deg + 1);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index s = 0; s < m; ++s) {
      const std::size_t t = support[static_cast<std::size_t>(s)];
      const double sw = std::sqrt(wts[static_cast<std::size_t>(s)]);
      const double z = (xs[t] - xs[i]) / h;
      double pw = 1.0;
      for (int d = 0; d <= deg; ++d) {
        design(s, d) = sw * pw;
        pw *= z;
      }
      rhs(s) = sw * ys[t];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() == design.cols()) {
      out[i] = qr.solve(rhs)(0);
    } else {
      double sw = 0.0, sy = 0.0;
      for (std::size_t s = 0; s < support.size(); ++s) {
        sw += wts[s];
        sy += wts[s] * ys[support[s]];
      }
      out[i] = sy / sw;
    }
  }
  return out;
}

CvReport cross_validate_alpha(const DenseMatrix& r, const DenseMatrix& x, const CvConfig& cfg) {
  if (cfg.alphas.empty()) throw ArgumentError("alpha grid must not be empty");
  for (const double a : cfg.alphas) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw ArgumentError("alpha grid values must be finite and non-negative");
    }
  }
  if (std::set<double>(cfg.alphas.begin(), cfg.alphas.end()).size() != cfg.alphas.size()) {
    throw ArgumentError("alpha grid contains duplicate values");
  }
  if (cfg.folds < 2) throw ArgumentError("cross-validation needs at least 2 folds");
  cfg.fit.validate();
  validate_inputs(r, x, cfg.fit.require_binary);

  const DenseMatrix covariates = x.size() > 0 ? x : DenseMatrix(r.rows(), 0);
  const auto n = static_cast<std::size_t>(r.rows());
  const auto j = static_cast<std::size_t>(r.cols());
  const auto w = static_cast<std::size_t>(covariates.cols());
  const FoldPartition partition = partition_entries(n, j, w, cfg.folds, cfg.seed);
  const bool any_positive = std::any_of(cfg.alphas.begin(), cfg.alphas.end(),
                                        [](double a) { return a > 0.0; });

  const std::size_t l = cfg.alphas.size();
  CvReport report;
  report.alphas = cfg.alphas;
  report.folds = cfg.folds;
  report.seed = cfg.seed;
  report.mae = DenseMatrix::Constant(static_cast<Eigen::Index>(l),
                                     static_cast<Eigen::Index>(cfg.folds), kNaN);
  std::mutex failure_mutex;
  auto record_failure = [&](std::size_t i, std::size_t fold, const std::string& what) {
    const std::lock_guard lock(failure_mutex);
    report.failures.push_back({i, fold, what});
  };

  parallel_for(cfg.folds, cfg.threads, [&](std::size_t fold) {
    const MaskedData masked = mask_fold(r, covariates, partition, fold, cfg.ipw);
    GramComponents components;
    try {
      components = gram_components(masked.r, masked.x, cfg.fit.k, cfg.fit.gram_estimator,
                                   cfg.fit.hetero, any_positive);
    } catch (const Error& e) {
      for (std::size_t i = 0; i < l; ++i) record_failure(i, fold, e.what());
      return;
    }
    for (std::size_t i = 0; i < l; ++i) {
      FitConfig fit_cfg = cfg.fit;
      fit_cfg.alpha = cfg.alphas[i];
      try {
        const GomModel model = fit_from_components(masked.r, masked.x, components, fit_cfg);
        report.mae(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(fold)) =
            fold_mae(r, predict(model), partition, fold);
      } catch (const Error& e) {
        record_failure(i, fold, e.what());
      }
    }
  });
  std::sort(report.failures.begin(), report.failures.end(),
            [](const CvCellFailure& a, const CvCellFailure& b) {
              return std::tie(a.alpha_index, a.fold) < std::tie(b.alpha_index, b.fold);
            });

  report.mean_mae.assign(l, kNaN);
  for (std::size_t i = 0; i < l; ++i) {
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t f = 0; f < cfg.folds; ++f) {
      const double v = report.mae(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f));
      if (std::isnan(v)) continue;
      total += v;
      ++used;
    }
    if (used > 0) report.mean_mae[i] = total / static_cast<double>(used);
  }

  std::vector<std::size_t> sorted(l);
  std::iota(sorted.begin(), sorted.end(), std::size_t{0});
  std::sort(sorted.begin(), sorted.end(),
            [&](std::size_t a, std::size_t b) { return cfg.alphas[a] < cfg.alphas[b]; });
  std::vector<std::size_t> order;
  std::vector<double> xs, ys;
  for (std::size_t rank = 0; rank < l; ++rank) {
    const std::size_t i = sorted[rank];
    if (std::isnan(report.mean_mae[i])) continue;
    order.push_back(i);
    // Failed alphas keep their slot, so ranks of the survivors have gaps.
    xs.push_back(cfg.smoothing_axis == SmoothingAxis::kGridRank ? static_cast<double>(rank)
                                                                : cfg.alphas[i]);
    ys.push_back(report.mean_mae[i]);
  }
  if (order.empty()) throw NumericalError("every cross-validation cell failed");
  const std::vector<double> fitted =
      order.size() >= 2 ? smooth_curve(xs, ys, cfg.smoothing_span, cfg.smoothing_degree) : ys;

  report.smoothed.assign(l, kNaN);
  std::size_t best = order.front();
  double best_value = fitted.front();
  for (std::size_t t = 0; t < order.size(); ++t) {
    report.smoothed[order[t]] = fitted[t];
    // Strict comparison in increasing alpha keeps the smaller alpha on ties.
    if (fitted[t] < best_value) {
      best_value = fitted[t];
      best = order[t];
    }
  }
  report.selected_index = best;
  report.selected_alpha = cfg.alphas[best];
  return report;
}

ParallelAnalysisResult parallel_analysis(const DenseMatrix& r, std::size_t n_perm, double q,
                                         std::uint64_t seed) {
  if (n_perm < 1) throw ArgumentError("parallel analysis needs at least one permutation");
  if (!(q > 0.0 && q < 1.0)) throw ArgumentError("parallel analysis quantile must lie in (0, 1)");
  require_finite(r, "response matrix R");
  const Eigen::Index n = r.rows();
  if (n < 1 || r.cols() < 1) throw ArgumentError("parallel analysis needs a non-empty matrix");

  auto spectrum = [n](const DenseMatrix& centred) {
    // The smaller Gram has the same non-zero spectrum.
    const DenseMatrix g = centred.rows() <= centred.cols() ? gram(centred)
                                                           : gram(centred.transpose());
    const Vector values = symmetric_eigenvalues(g) / static_cast<double>(n);
    return std::vector<double>(values.data(), values.data() + values.size());
  };

  const DenseMatrix centred = r.rowwise() - r.colwise().mean();
  ParallelAnalysisResult out;
  out.observed = spectrum(centred);
  const std::size_t m = out.observed.size();

  std::vector<std::vector<double>> null_by_rank(m);
  CounterRng rng(seed, "parallel-analysis");
  DenseMatrix shuffled = centred;
  std::vector<double> column(static_cast<std::size_t>(n));
  for (std::size_t p = 0; p < n_perm; ++p) {
    for (Eigen::Index c = 0; c < centred.cols(); ++c) {
      for (Eigen::Index i = 0; i < n; ++i) column[static_cast<std::size_t>(i)] = centred(i, c);
      shuffle_in_place(column, rng);
      for (Eigen::Index i = 0; i < n; ++i) shuffled(i, c) = column[static_cast<std::size_t>(i)];
    }
    const auto null_values = spectrum(shuffled);
    for (std::size_t t = 0; t < m; ++t) null_by_rank[t].push_back(null_values[t]);
  }
  out.thresholds.resize(m);
  for (std::size_t t = 0; t < m; ++t) out.thresholds[t] = quantile(null_by_rank[t], q);
  while (out.k < m && out.observed[out.k] > out.thresholds[out.k]) ++out.k;
  return out;
}

}  // namespace cogom
