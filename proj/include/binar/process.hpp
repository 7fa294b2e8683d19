#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "binar/copulas.hpp"
#include "binar/distributions.hpp"
#include "binar/random.hpp"

namespace binar {

using CountSeries = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Two aligned count series of common length N >= 2.
struct SeriesPair {
  CountSeries x1;
  CountSeries x2;

  Eigen::Index size() const { return x1.size(); }
  /// Throws std::invalid_argument on unequal lengths, N < 2 or negative counts.
  void validate() const;
};

/// BINAR(1) with diagonal thinning matrix diag(alpha1, alpha2).
struct BinarModel {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  InnovationModel innovations;

  void validate() const;
};

inline constexpr std::int64_t kDefaultBurnin = 500;

/// alpha o x: sum of x Bernoulli(alpha) draws, one uniform per trial.
std::int64_t thin(double alpha, std::int64_t x, RandomStream& rng);

/**
 * Simulates n retained observations. The initial state is one innovation
 * draw; `burnin` recursion steps are discarded before the first retained
 * value. Bit-identical for a fixed seed.
 */
SeriesPair simulate(const BinarModel& model, Eigen::Index n, std::int64_t burnin,
                    std::uint64_t seed);

/// Stationary moments of a BINAR(1) process.
struct MomentSummary {
  Eigen::Vector2d mean;
  Eigen::Vector2d variance;
  Eigen::Vector2d alpha;
  /// Cov(R1, R2) (adaptive truncation).
  double innovation_cov = 0.0;
  /// Cov(X1_t, X2_t).
  double cross_cov = 0.0;
  /// Corr(X1_t, X2_t).
  double cross_corr = 0.0;

  /// Corr(X_j,t, X_j,t+h) = alpha_j^h; component j in {0, 1}.
  double autocorr(int j, int h) const;
  double autocov(int j, int h) const { return autocorr(j, h) * variance(j); }
  /// Cov(X_i,t, X_j,t+h) for i != j: alpha_j^h Cov(R1,R2) / (1 - alpha1 alpha2).
  double cross_cov_lag(int i, int h) const;
};

MomentSummary theoretical_moments(const BinarModel& model);

/// Limit covariance of sqrt(N) (alpha_hat - alpha, lambda_hat - lambda) under
/// Poisson innovations (closed form).
Eigen::Matrix2d cls_asymptotic_cov_poisson(double alpha, double lambda);

/// Raw moments E X, E X^2, E X^3 of the stationary INAR(1) marginal.
Eigen::Vector3d stationary_raw_moments(double alpha, const MarginalSpec& m);

/// Same limit for any innovation law: M^-1 A M^-1 built from stationary moments.
Eigen::Matrix2d cls_asymptotic_cov_general(double alpha, const MarginalSpec& m);

}  // namespace binar
