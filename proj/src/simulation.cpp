#include "cogom/simulation.hpp"

#include "cogom/errors.hpp"

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace cogom {

namespace {

constexpr double kMinAcceptance = 1e-6;
constexpr double kMeanSlack = 1e-9;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double draw_beta(double a, double b, CounterRng& rng) {
  boost::random::gamma_distribution<double> ga(a, 1.0);
  boost::random::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

}  // namespace

void SimStudyConfig::validate() const {
  if (n < 1 || j < 1 || k < 1) throw ArgumentError("N, J and K must be at least 1");
  if (k > std::min(n, j)) {
    throw ArgumentError("K=" + std::to_string(k) + " exceeds min(N, J)=" +
                        std::to_string(std::min(n, j)));
  }
  const auto beta = dirichlet_or_default();
  if (beta.size() != k) {
    throw ArgumentError("Dirichlet concentration has " + std::to_string(beta.size()) +
                        " entries, expected K=" + std::to_string(k));
  }
  for (const double b : beta) {
    if (!(b > 0.0)) throw ArgumentError("Dirichlet concentrations must be positive");
  }
  if (theta_law.kind == ThetaLaw::Kind::kBeta && !(theta_law.a > 0.0 && theta_law.b > 0.0)) {
    throw ArgumentError("Beta(a, b) parameters must be positive");
  }
  if (m_law.kind == MLaw::Kind::kTruncatedNormal && !(m_law.sd > 0.0 && m_law.bound > 0.0)) {
    throw ArgumentError("truncated normal needs positive sd and bound");
  }
  if (x_noise.kind == XNoise::Kind::kHomoskedastic && !(x_noise.sigma >= 0.0)) {
    throw ArgumentError("covariate noise sigma must be non-negative");
  }
  if (x_noise.kind == XNoise::Kind::kPowerLaw && !(x_noise.beta_het >= 0.0)) {
    throw ArgumentError("heteroskedasticity exponent must be non-negative");
  }
}

std::vector<double> SimStudyConfig::dirichlet_or_default() const {
  return dirichlet.empty() ? std::vector<double>(k, 1.0) : dirichlet;
}

std::vector<double> heteroskedastic_sigmas(std::size_t p, double beta_het, CounterRng& rng) {
  if (!(beta_het >= 0.0)) throw ArgumentError("heteroskedasticity exponent must be >= 0");
  if (p == 0) return {};
  std::vector<double> powered(p);
  double total = 0.0;
  while (!(total > 0.0)) {
    for (auto& v : powered) {
      // 1 - U lies in (0, 1], so v^beta is always defined and positive.
      v = std::pow(1.0 - rng.uniform(), beta_het);
    }
    total = std::accumulate(powered.begin(), powered.end(), 0.0);
  }
  std::vector<double> sigmas(p);
  const double scale = static_cast<double>(p) / total;
  for (std::size_t i = 0; i < p; ++i) sigmas[i] = std::sqrt(scale * powered[i]);
  return sigmas;
}

std::vector<double> heteroskedastic_sigmas(std::size_t p, double beta_het, std::uint64_t seed) {
  CounterRng rng(seed, "noise-scale");
  return heteroskedastic_sigmas(p, beta_het, rng);
}

double sample_truncated_normal(double mean, double sd, double bound, CounterRng& rng) {
  if (!(bound > 0.0) || !(sd > 0.0)) {
    throw ArgumentError("truncated normal needs positive sd and bound");
  }
  const double accept = normal_cdf((bound - mean) / sd) - normal_cdf((-bound - mean) / sd);
  if (!(accept >= kMinAcceptance)) {
    throw ArgumentError("truncated normal acceptance probability " + std::to_string(accept) +
                        " is below 1e-6; widen the bound or move the mean");
  }
  boost::random::normal_distribution<double> normal(mean, sd);
  for (;;) {
    const double z = normal(rng);
    if (z >= -bound && z <= bound) return z;
  }
}

double sample_truncated_normal(double mean, double sd, double bound, std::uint64_t seed) {
  CounterRng rng(seed, "truncated-normal");
  return sample_truncated_normal(mean, sd, bound, rng);
}

DenseMatrix sample_dirichlet_rows(std::size_t n, const std::vector<double>& concentration,
                                  CounterRng& rng) {
  const auto k = static_cast<Eigen::Index>(concentration.size());
  DenseMatrix out(static_cast<Eigen::Index>(n), k);
  std::vector<boost::random::gamma_distribution<double>> gammas;
  gammas.reserve(concentration.size());
  for (const double c : concentration) gammas.emplace_back(c, 1.0);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    double total = 0.0;
    // Rejection of an all-zero row only happens under extreme underflow.
    do {
      total = 0.0;
      for (Eigen::Index c = 0; c < k; ++c) {
        out(i, c) = gammas[static_cast<std::size_t>(c)](rng);
        total += out(i, c);
      }
    } while (!(total > 0.0));
    out.row(i) /= total;
  }
  return out;
}

SimDataset generate(const SimStudyConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<Eigen::Index>(cfg.n);
  const auto j = static_cast<Eigen::Index>(cfg.j);
  const auto w = static_cast<Eigen::Index>(cfg.w);
  const auto k = static_cast<Eigen::Index>(cfg.k);

  SimDataset out;
  out.config = cfg;

  {
    CounterRng rng(cfg.seed, "pi");
    out.pi = sample_dirichlet_rows(cfg.n, cfg.dirichlet_or_default(), rng);
    if (cfg.inject_pure) out.pi.topRows(k).setIdentity();
  }
  {
    CounterRng rng(cfg.seed, "theta");
    out.theta.resize(j, k);
    for (Eigen::Index a = 0; a < j; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) {
        out.theta(a, b) = cfg.theta_law.kind == ThetaLaw::Kind::kBeta
                              ? draw_beta(cfg.theta_law.a, cfg.theta_law.b, rng)
                              : rng.uniform();
      }
    }
  }
  {
    CounterRng rng(cfg.seed, "m");
    out.m.resize(w, k);
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index a = 0; a < w; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) {
        out.m(a, b) = cfg.m_law.kind == MLaw::Kind::kTruncatedNormal
                          ? sample_truncated_normal(cfg.m_law.mean, cfg.m_law.sd,
                                                    cfg.m_law.bound, rng)
                          : normal(rng);
      }
    }
  }

  DenseMatrix mean = out.pi * out.theta.transpose();
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < j; ++b) {
      double& p = mean(a, b);
      if (p < -kMeanSlack || p > 1.0 + kMeanSlack) {
        throw GenerationError("response mean " + std::to_string(p) + " at (" +
                              std::to_string(a) + ", " + std::to_string(b) +
                              ") lies outside [0, 1]; the Theta law is invalid");
      }
      if (p < 0.0 || p > 1.0) {
        p = std::clamp(p, 0.0, 1.0);
        ++out.clipped_means;
      }
    }
  }
  if (cfg.sample_responses) {
    CounterRng rng(cfg.seed, "responses");
    out.r = sample_bernoulli(mean, rng);
  } else {
    out.r = mean;
  }

  out.x = out.pi * out.m.transpose();
  if (w > 0) {
    std::vector<double> row_sd(cfg.n, 1.0);
    std::vector<double> col_sd(cfg.w, 1.0);
    if (cfg.x_noise.kind == XNoise::Kind::kPowerLaw) {
      CounterRng scale_rng(cfg.seed, "noise-scale");
      if (cfg.x_noise.axis == XNoise::Axis::kRows) {
        row_sd = heteroskedastic_sigmas(cfg.n, cfg.x_noise.beta_het, scale_rng);
      } else {
        col_sd = heteroskedastic_sigmas(cfg.w, cfg.x_noise.beta_het, scale_rng);
      }
    } else {
      std::fill(row_sd.begin(), row_sd.end(), cfg.x_noise.sigma);
    }
    CounterRng rng(cfg.seed, "x-noise");
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < w; ++b) {
        out.x(a, b) += row_sd[static_cast<std::size_t>(a)] *
                       col_sd[static_cast<std::size_t>(b)] * normal(rng);
      }
    }
  }
  return out;
}

DenseMatrix sample_bernoulli(const DenseMatrix& mean, CounterRng& rng) {
  DenseMatrix r(mean.rows(), mean.cols());
  for (Eigen::Index a = 0; a < mean.rows(); ++a) {
    for (Eigen::Index b = 0; b < mean.cols(); ++b) r(a, b) = rng.uniform() < mean(a, b) ? 1.0 : 0.0;
  }
  return r;
}

}  // namespace cogom
