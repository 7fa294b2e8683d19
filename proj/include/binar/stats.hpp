#pragma once

#include <ostream>

#include <Eigen/Core>

#include "binar/process.hpp"

namespace binar {

struct SummaryStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  /// Divisor N - 1 (0 for a single observation).
  double variance = 0.0;
};

SummaryStats summary_stats(const CountSeries& x);

/// Sample autocorrelation at lags 0..maxlag with the overall mean and divisor N.
/// Requires maxlag < N / 2.
Eigen::VectorXd acf(const CountSeries& x, Eigen::Index maxlag);

/// Partial autocorrelation at lags 1..maxlag (entry h-1 is lag h), by the
/// Durbin-Levinson recursion on acf().
Eigen::VectorXd pacf(const CountSeries& x, Eigen::Index maxlag);

/// CSV with columns lag, acf, pacf, lower, upper; bands are -+1.96/sqrt(N).
/// pacf is empty at lag 0.
void write_acf_csv(const CountSeries& x, Eigen::Index maxlag, std::ostream& os);

}  // namespace binar
