#include "cogom/heteropca.hpp"

#include "cogom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cogom {

void HeteroPcaConfig::validate() const {
  if (rank < 1) throw ArgumentError("HeteroPCA rank must be at least 1");
  if (!(tol > 0.0)) throw ArgumentError("HeteroPCA tolerance must be positive");
}

HeteroPcaResult hetero_pca(const DenseMatrix& g, const HeteroPcaConfig& cfg,
                           const NumericSettings& settings) {
  cfg.validate();
  require_symmetric(g, settings);
  if (cfg.rank > static_cast<std::size_t>(g.rows())) {
    throw ArgumentError("HeteroPCA rank " + std::to_string(cfg.rank) + " exceeds dimension " +
                        std::to_string(g.rows()));
  }

  HeteroPcaResult out;
  out.debiased_gram = hollow(g);
  out.final_change = std::numeric_limits<double>::infinity();

  while (out.iters_run < cfg.max_iters) {
    // Spectrum of N(t) is only needed for the scale-free stopping rule.
    SpectralDecomposition eig;
    double scale = 1.0;
    if (cfg.absolute_change) {
      eig = top_k_eigen(out.debiased_gram, cfg.rank, settings);
    } else {
      auto full = top_k_eigen_with_spectrum(out.debiased_gram, cfg.rank, settings);
      eig = std::move(full.top);
      const Vector& spectrum = full.spectrum;
      scale = std::max({std::abs(spectrum(0)), std::abs(spectrum(spectrum.size() - 1)), 1.0});
    }

    // diag(U diag(lambda) U^T)_i = sum_k lambda_k u_ik^2
    const Vector imputed =
        eig.vectors.cwiseAbs2() * eig.values;
    const double change = (imputed - out.debiased_gram.diagonal()).cwiseAbs().maxCoeff();
    out.debiased_gram.diagonal() = imputed;
    ++out.iters_run;
    out.final_change = change / scale;
    if (out.final_change < cfg.tol) break;
  }

  out.decomposition = top_k_eigen(out.debiased_gram, cfg.rank, settings);
  if (out.iters_run == 0) out.final_change = 0.0;
  return out;
}

}  // namespace cogom
