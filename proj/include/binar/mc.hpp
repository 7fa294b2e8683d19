#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "binar/estimation.hpp"
#include "binar/process.hpp"

namespace binar {

/// Replicated simulate-then-estimate experiment.
struct MCConfig {
  explicit MCConfig(BinarModel truth) : model(std::move(truth)) {}

  BinarModel model;
  Eigen::Index n = 500;
  int reps = 1000;
  std::vector<Method> methods{Method::CLS, Method::CML, Method::TwoStep};
  std::uint64_t base_seed = 1;
  FitFamilies fit_families;
  std::int64_t burnin = kDefaultBurnin;
  OptimizerSpec opt;

  void validate() const;
};

/// Aggregates for one (method, parameter) pair over successful replicates.
struct MCCell {
  std::string method;
  std::string parameter;
  double truth = 0.0;
  /// Replicate index and estimate, in replicate order.
  std::vector<std::pair<int, double>> estimates;
  double mse = 0.0;
  double bias = 0.0;
  double bias_se = 0.0;
  int n_fail = 0;
};

struct MCReport {
  Eigen::Index n = 0;
  int reps = 0;
  std::uint64_t base_seed = 0;
  std::vector<MCCell> cells;
  /// Failed replicates per method.
  std::map<std::string, int> failures;
  /// Set when any method fails on more than 5% of replicates.
  bool unreliable = false;

  const MCCell& cell(const std::string& method, const std::string& parameter) const;
};

using NamedEstimates = std::vector<std::pair<std::string, double>>;

/// A replicate estimator. Throwing marks the replicate as failed for `method`.
struct MCEstimator {
  std::string method;
  std::function<NamedEstimates(const SeriesPair&)> estimate;
};

/// True parameter values keyed by estimate name. Declared NegBin components of
/// a Poisson truth get sigma2 = lambda.
std::map<std::string, double> truth_values(const BinarModel& model, const FitFamilies& families);

/// Runs cfg.methods on cfg.reps replicates; replicate i uses stream
/// derive_seed(base_seed, i). Output does not depend on `workers`.
MCReport run_mc(const MCConfig& cfg, int workers = 1);

/// Same harness with caller-supplied estimators (cfg.methods is ignored).
MCReport run_mc(const MCConfig& cfg, const std::vector<MCEstimator>& estimators,
                int workers = 1);

/// Sample standard deviation (divisor M-1) of estimate - truth. Needs >= 2 values.
double bias_se(std::span<const double> estimates, double truth);

void write_report_csv(const MCReport& report, std::ostream& os);
void write_report_json(const MCReport& report, std::ostream& os);
/// Columns rep, method, parameter, estimate.
void write_replicates_csv(const MCReport& report, std::ostream& os);

}  // namespace binar
