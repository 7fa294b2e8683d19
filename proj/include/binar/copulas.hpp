#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "binar/distributions.hpp"
#include "binar/random.hpp"

namespace binar {

enum class CopulaFamily { Product, FGM, Frank, Clayton };

std::string to_string(CopulaFamily family);
CopulaFamily parse_copula_family(const std::string& name);

/// Family tag plus dependence parameter. Product ignores theta.
struct CopulaSpec {
  CopulaFamily family = CopulaFamily::Product;
  double theta = 0.0;

  static CopulaSpec product() { return {CopulaFamily::Product, 0.0}; }
  static CopulaSpec fgm(double theta);
  static CopulaSpec frank(double theta);
  static CopulaSpec clayton(double theta);

  /// Throws std::invalid_argument when theta is outside the family domain.
  void validate() const;
};

/// Below this |theta| Frank and Clayton are evaluated as the product copula.
inline constexpr double kIndependenceLimit = 1e-12;

namespace kernels {

// Copula cdfs on [0,1]^2. Callers guarantee 0 < u, v < 1; the boundary cases
// are dispatched by copula_cdf().

template <typename Scalar>
Scalar fgm(Scalar u, Scalar v, Scalar theta) {
  return u * v * (Scalar(1) + theta * (Scalar(1) - u) * (Scalar(1) - v));
}

/// -1/theta * log(1 + expm1(-theta u) expm1(-theta v) / expm1(-theta)).
template <typename Scalar>
Scalar frank(Scalar u, Scalar v, Scalar theta) {
  using std::abs;
  using std::expm1;
  using std::log1p;
  if (abs(theta) < Scalar(kIndependenceLimit)) return u * v;
  const Scalar ratio = expm1(-theta * u) * expm1(-theta * v) / expm1(-theta);
  return -log1p(ratio) / theta;
}

/// max(u^-theta + v^-theta - 1, 0)^(-1/theta), written with expm1/log1p so it
/// degrades smoothly to u v as theta -> 0.
template <typename Scalar>
Scalar clayton(Scalar u, Scalar v, Scalar theta) {
  using std::abs;
  using std::exp;
  using std::expm1;
  using std::log;
  using std::log1p;
  if (abs(theta) < Scalar(kIndependenceLimit)) return u * v;
  const Scalar s = expm1(-theta * log(u)) + expm1(-theta * log(v));
  if (Scalar(1) + s <= Scalar(0)) return Scalar(0);
  return exp(-log1p(s) / theta);
}

}  // namespace kernels

/// C(u, v; theta). Satisfies the boundary conditions exactly.
double copula_cdf(const CopulaSpec& c, double u, double v);

/// Conditional distribution h(v | u) = dC/du evaluated at (u, v).
double copula_conditional(const CopulaSpec& c, double u, double v);

/// Returns v with dC/du(u, v) = w. Closed form for FGM, Frank and Clayton
/// theta > 0; bisection otherwise.
double conditional_quantile(const CopulaSpec& c, double u, double w);

/// Innovation law: two marginals joined by a copula.
struct InnovationModel {
  MarginalSpec marginal1;
  MarginalSpec marginal2;
  CopulaSpec copula;

  void validate() const { copula.validate(); }
};

/// Rectangle-rule joint pmf P(R1 = k, R2 = l), with F(-1) = 0.
double joint_pmf(const InnovationModel& m, std::int64_t k, std::int64_t l);

/**
 * Joint pmf on the grid [0, k_max] x [0, l_max] from precomputed marginal
 * tables. Tiny negative cells (> -1e-12) are clamped to zero; anything more
 * negative throws NumericalError.
 */
Eigen::MatrixXd joint_pmf_grid(const CopulaSpec& c, const MarginalTable& t1,
                               const MarginalTable& t2);
Eigen::MatrixXd joint_pmf_grid(const InnovationModel& m, std::int64_t k_max,
                               std::int64_t l_max);

/// Conditional-inversion sampler with cached marginal tables.
class InnovationSampler {
 public:
  explicit InnovationSampler(const InnovationModel& m);

  std::pair<std::int64_t, std::int64_t> operator()(RandomStream& rng) const;

  const InnovationModel& model() const { return model_; }

 private:
  InnovationModel model_;
  MarginalTable table1_;
  MarginalTable table2_;
};

/// One draw (R1, R2). Builds a sampler per call; use InnovationSampler in loops.
std::pair<std::int64_t, std::int64_t> sample_innovation_pair(const InnovationModel& m,
                                                             RandomStream& rng);

/// Upper index for adaptive truncation: quantile(1 - 1e-10), capped at 500.
std::int64_t adaptive_truncation(const MarginalSpec& m);

/// Truncated covariance sum_{k<=M1} sum_{l<=M2} k l c(k, l) - mu1 mu2, where
/// mu_j = sum_{k<=M_j} k f_j(k) are the truncated marginal means.
double innovation_covariance(const InnovationModel& m, std::int64_t M1, std::int64_t M2);
/// Same with M_j = adaptive_truncation(marginal_j).
double innovation_covariance(const InnovationModel& m);

}  // namespace binar
