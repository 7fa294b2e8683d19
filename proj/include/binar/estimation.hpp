#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "binar/copulas.hpp"
#include "binar/likelihood.hpp"
#include "binar/optimizer.hpp"
#include "binar/process.hpp"

namespace binar {

enum class Method { CLS, CML, TwoStep };

std::string to_string(Method method);
Method parse_method(const std::string& name);

/// Declared model families for a fit.
struct FitFamilies {
  MarginalKind marginal1 = MarginalKind::Poisson;
  MarginalKind marginal2 = MarginalKind::Poisson;
  CopulaFamily copula = CopulaFamily::FGM;

  /// marginals: one of pp, nbp, pnb, nbnb (first letter pair is series 1).
  static FitFamilies parse(const std::string& marginals, const std::string& copula);
  std::string marginals_code() const;
  /// Number of negative binomial components.
  int negbin_count() const;
  bool has_theta() const { return copula != CopulaFamily::Product; }
};

/// Estimate clamping limits.
inline constexpr double kAlphaMax = 1.0 - 1e-6;
inline constexpr double kLambdaMin = 1e-8;
inline constexpr double kSigmaGap = 1e-8;

/// Per-component conditional least squares fit.
struct ClsMarginalFit {
  double alpha = 0.0;
  double lambda = 0.0;
  double alpha_raw = 0.0;
  double lambda_raw = 0.0;
  /// Moment estimate of the innovation variance, mean(resid^2) - a(1-a) mean(X_{t-1}).
  double sigma2_moment = 0.0;
  /// Plug-in covariance of (alpha_hat, lambda_hat), asymptotic matrix / N.
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  bool alpha_clamped = false;
  bool lambda_clamped = false;
};

/**
 * Exact least-squares minimizer of sum_t (X_t - a X_{t-1} - l)^2, using the
 * separate means of X_2..X_N and X_1..X_{N-1}. `kind` selects the asymptotic
 * covariance (Poisson closed form, or the general form with the moment
 * variance estimate). Requires N >= 3 and a nonconstant lagged series.
 */
ClsMarginalFit cls_marginal(const CountSeries& x, MarginalKind kind = MarginalKind::Poisson);

/// resid1_t * resid2_t for t = 2..N, where resid_j = X_j,t - a_j X_j,t-1 - l_j.
Eigen::VectorXd cls_residual_products(const SeriesPair& pair, const ClsMarginalFit& fit1,
                                      const ClsMarginalFit& fit2);

struct DependenceFit {
  double theta = 0.0;
  std::optional<double> sigma2_1;
  std::optional<double> sigma2_2;
  /// Minimized sum of squares.
  double objective = 0.0;
  std::vector<std::string> flags;
};

/// Minimizes the truncated-covariance least-squares criterion over theta and
/// any negative binomial variances, with adaptive truncation.
DependenceFit cls_dependence(const SeriesPair& pair, const ClsMarginalFit& fit1,
                             const ClsMarginalFit& fit2, const FitFamilies& families,
                             const OptimizerSpec& opt = {});

/// Closed-form FGM estimate for Poisson marginals (not clamped to [-1, 1]).
double cls_theta_fgm_closed_form(const SeriesPair& pair, const ClsMarginalFit& fit1,
                                 const ClsMarginalFit& fit2, std::int64_t M1,
                                 std::int64_t M2);

/// Theta search box for a family.
Bounds theta_bounds(CopulaFamily family);

/// Copula used inside estimators: |theta| < 1e-6 maps to the product copula for
/// Frank and Clayton, which excludes theta = 0 from their domains.
CopulaSpec estimation_copula(CopulaFamily family, double theta);

/// Output of every estimator.
struct FitReport {
  Method method = Method::CLS;
  FitFamilies families;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double theta = 0.0;
  std::optional<double> sigma2_1;
  std::optional<double> sigma2_2;
  std::optional<double> loglik;
  std::optional<double> aic;
  /// Parameter count entering the AIC.
  int n_params = 0;
  std::map<std::string, double> se;
  std::vector<std::string> raw_flags;
  std::int64_t evals = 0;

  BinarModel model() const;
  /// Named estimates in canonical order (alpha1, ..., sigma2_2 when present).
  std::vector<std::pair<std::string, double>> estimates() const;
};

/// 2k - 2 loglik. k >= 0 (k = 0 occurs for a two-step fit with nothing left
/// to estimate in the second step).
double aic(double loglik, int k);

FitReport cls_fit(const SeriesPair& pair, const FitFamilies& families,
                  const OptimizerSpec& opt = {});

/// Maximizes the conditional log-likelihood over all parameters. Starts from
/// `init` when given, otherwise from the CLS estimates.
FitReport cml_fit(const SeriesPair& pair, const FitFamilies& families,
                  const std::optional<FitReport>& init = std::nullopt,
                  const OptimizerSpec& opt = {});

/// CLS for (alpha, lambda), then maximizes the log-likelihood over theta and
/// negative binomial variances only.
FitReport twostep_fit(const SeriesPair& pair, const FitFamilies& families,
                      const OptimizerSpec& opt = {});

FitReport fit(const SeriesPair& pair, const FitFamilies& families, Method method,
              const OptimizerSpec& opt = {});

/// Central-difference Hessian with steps h_i = max(1e-4 |x_i|, 1e-5).
Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x);

/// sqrt(diag((-H)^-1)) for a log-likelihood `loglik` maximized at x. Throws
/// NumericalError when -H is not positive definite.
Eigen::VectorXd observed_info_se(const Objective& loglik, const Eigen::VectorXd& x);

/// Observed-information standard errors over the likelihood-step parameters of
/// a CML or two-step fit. Refuses (NumericalError) at boundary optima.
std::map<std::string, double> observed_info_se(const FitReport& fit, const SeriesPair& pair);

}  // namespace binar
