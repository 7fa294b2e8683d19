#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace binar {

enum class MarginalKind { Poisson, NegBin };

/**
 * Univariate innovation distribution on {0, 1, 2, ...}.
 *
 * Both variants are parameterized by mean `lambda`; the negative binomial
 * additionally carries its variance `sigma2`, which must exceed the mean.
 * Internally the negative binomial is the usual (size, prob) form with
 * size = lambda^2 / (sigma2 - lambda) and prob = lambda / sigma2.
 */
class MarginalSpec {
 public:
  static MarginalSpec poisson(double lambda);
  static MarginalSpec negbin(double lambda, double sigma2);

  MarginalKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  /// Poisson: lambda. NegBin: sigma2.
  double variance() const { return sigma2_; }

  double size() const;
  double prob() const;

  std::string name() const;

 private:
  MarginalSpec(MarginalKind kind, double lambda, double sigma2)
      : kind_(kind), lambda_(lambda), sigma2_(sigma2) {}

  MarginalKind kind_;
  double lambda_;
  double sigma2_;
};

double log_pmf(const MarginalSpec& m, std::int64_t k);
double pmf(const MarginalSpec& m, std::int64_t k);

/// P(R <= k); zero for k < 0. Computed as the running sum of pmf.
double cdf(const MarginalSpec& m, std::int64_t k);

/// Generalized inverse min{k >= 0 : cdf(k) >= u}. Throws for u outside [0, 1).
std::int64_t quantile(const MarginalSpec& m, double u);

/// E R^3. Closed form for Poisson; truncated series for NegBin.
double third_moment(const MarginalSpec& m);

/**
 * Tabulated pmf/cdf on [0, upper]. Accumulates exactly as cdf() does, so
 * lookups agree bit-for-bit with the free functions.
 */
class MarginalTable {
 public:
  MarginalTable(const MarginalSpec& m, std::int64_t upper);

  /// Table reaching at least the 1 - tail quantile, capped at `cap`.
  static MarginalTable covering(const MarginalSpec& m, double tail,
                                std::int64_t cap = 100000);

  std::int64_t upper() const { return static_cast<std::int64_t>(pmf_.size()) - 1; }
  double pmf(std::int64_t k) const { return pmf_[static_cast<std::size_t>(k)]; }
  double cdf(std::int64_t k) const {
    return k < 0 ? 0.0 : cdf_[static_cast<std::size_t>(k)];
  }
  /// Same result as binar::quantile; extends past the table on demand.
  std::int64_t quantile(double u) const;
  const MarginalSpec& spec() const { return spec_; }

 private:
  MarginalSpec spec_;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
};

/// Bivariate Poisson pmf with marginal means lambda1, lambda2 and
/// covariance lambda (trivariate reduction form).
double bivpoisson_pmf(std::int64_t k, std::int64_t l, double lambda1, double lambda2,
                      double lambda);

/// Bivariate negative binomial pmf with means lambda1, lambda2 and common
/// shape beta; Cov = lambda1 * lambda2 / beta.
double bivnegbin_pmf(std::int64_t k, std::int64_t l, double lambda1, double lambda2,
                     double beta);

}  // namespace binar
