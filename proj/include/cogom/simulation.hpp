#pragma once

#include "cogom/linalg.hpp"
#include "cogom/random.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cogom {

struct ThetaLaw {
  enum class Kind { kUniform01, kBeta };
  Kind kind = Kind::kUniform01;
  double a = 1.0;
  double b = 1.0;
};

struct MLaw {
  enum class Kind { kStandardNormal, kTruncatedNormal };
  Kind kind = Kind::kStandardNormal;
  double mean = 0.0;
  double sd = 1.0;
  double bound = 3.0;  // truncation to [-bound, bound]
};

struct XNoise {
  enum class Kind { kHomoskedastic, kPowerLaw };
  // Which axis of the N x W covariate matrix carries the power-law variances.
  enum class Axis { kRows, kColumns };
  Kind kind = Kind::kHomoskedastic;
  double sigma = 0.5;
  double beta_het = 0.0;
  Axis axis = Axis::kRows;
};

struct SimStudyConfig {
  std::size_t n = 200;
  std::size_t j = 20;
  std::size_t w = 10;
  std::size_t k = 3;
  std::vector<double> dirichlet;  // empty means all ones
  ThetaLaw theta_law{};
  MLaw m_law{};
  XNoise x_noise{};
  bool inject_pure = false;  // rows 0..K-1 of Pi set to the identity
  bool sample_responses = true;  // false: R is the exact mean Pi * Theta^T
  std::uint64_t seed = 0;

  void validate() const;
  std::vector<double> dirichlet_or_default() const;
};

struct SimDataset {
  DenseMatrix r;   // N x J
  DenseMatrix x;   // N x W
  DenseMatrix pi;  // N x K
  DenseMatrix theta;  // J x K
  DenseMatrix m;      // W x K
  std::size_t clipped_means = 0;  // entries of Pi * Theta^T clipped into [0, 1]
  SimStudyConfig config;
};

/// Draws (Pi, Theta, M), Bernoulli responses and noisy covariates. A pure
/// function of the config, seed included. Each matrix uses its own named
/// random stream.
SimDataset generate(const SimStudyConfig& cfg);

/// Standard deviations with sigma_k^2 = p v_k^beta / sum_i v_i^beta for
/// v ~ Unif(0, 1], so the variances sum to p.
std::vector<double> heteroskedastic_sigmas(std::size_t p, double beta_het, CounterRng& rng);
std::vector<double> heteroskedastic_sigmas(std::size_t p, double beta_het, std::uint64_t seed);

/// Rejection sampler for Normal(mean, sd^2) restricted to [-bound, bound].
/// Throws ArgumentError when the acceptance probability is below 1e-6.
double sample_truncated_normal(double mean, double sd, double bound, CounterRng& rng);
double sample_truncated_normal(double mean, double sd, double bound, std::uint64_t seed);

/// Independent Bernoulli(mean(i, j)) entries, drawn row-major.
DenseMatrix sample_bernoulli(const DenseMatrix& mean, CounterRng& rng);

/// Row-wise Dirichlet draws.
DenseMatrix sample_dirichlet_rows(std::size_t n, const std::vector<double>& concentration,
                                  CounterRng& rng);

}  // namespace cogom
