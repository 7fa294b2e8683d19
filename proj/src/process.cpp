#include "binar/process.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/LU>

#include "binar/errors.hpp"

namespace binar {

namespace {

void check_alpha(double alpha, const char* name) {
  if (!std::isfinite(alpha) || alpha < 0.0 || alpha >= 1.0) {
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1)");
  }
}

}  // namespace

void SeriesPair::validate() const {
  if (x1.size() != x2.size()) throw std::invalid_argument("series lengths differ");
  if (x1.size() < 2) throw std::invalid_argument("series need at least 2 observations");
  if (x1.size() > 0 && (x1.minCoeff() < 0 || x2.minCoeff() < 0)) {
    throw std::invalid_argument("counts must be nonnegative");
  }
}

void BinarModel::validate() const {
  check_alpha(alpha1, "alpha1");
  check_alpha(alpha2, "alpha2");
  innovations.validate();
}

std::int64_t thin(double alpha, std::int64_t x, RandomStream& rng) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("thinning probability outside [0, 1]");
  if (x < 0) throw std::invalid_argument("thinning a negative count");
  std::int64_t survivors = 0;
  for (std::int64_t i = 0; i < x; ++i) survivors += rng.bernoulli(alpha) ? 1 : 0;
  return survivors;
}

SeriesPair simulate(const BinarModel& model, Eigen::Index n, std::int64_t burnin,
                    std::uint64_t seed) {
  model.validate();
  if (n < 1) throw std::invalid_argument("simulate requires n >= 1");
  if (burnin < 0) throw std::invalid_argument("burnin must be >= 0");
  RandomStream rng(seed);
  const InnovationSampler draw(model.innovations);

  auto [s1, s2] = draw(rng);
  const auto step = [&] {
    const auto [r1, r2] = draw(rng);
    s1 = thin(model.alpha1, s1, rng) + r1;
    s2 = thin(model.alpha2, s2, rng) + r2;
  };
  for (std::int64_t b = 0; b < burnin; ++b) step();

  SeriesPair out{CountSeries(n), CountSeries(n)};
  for (Eigen::Index t = 0; t < n; ++t) {
    step();
    out.x1(t) = s1;
    out.x2(t) = s2;
  }
  return out;
}

double MomentSummary::autocorr(int j, int h) const { return std::pow(alpha(j), h); }

double MomentSummary::cross_cov_lag(int i, int h) const {
  const int j = 1 - i;
  return std::pow(alpha(j), h) * innovation_cov / (1.0 - alpha(0) * alpha(1));
}

MomentSummary theoretical_moments(const BinarModel& model) {
  model.validate();
  MomentSummary s;
  s.alpha << model.alpha1, model.alpha2;
  const MarginalSpec* margins[2] = {&model.innovations.marginal1, &model.innovations.marginal2};
  for (int j = 0; j < 2; ++j) {
    const double a = s.alpha(j);
    const double lam = margins[j]->lambda();
    s.mean(j) = lam / (1.0 - a);
    s.variance(j) = (margins[j]->variance() + a * lam) / (1.0 - a * a);
  }
  s.innovation_cov = innovation_covariance(model.innovations);
  s.cross_cov = s.innovation_cov / (1.0 - model.alpha1 * model.alpha2);
  s.cross_corr = s.cross_cov / std::sqrt(s.variance(0) * s.variance(1));
  return s;
}

Eigen::Matrix2d cls_asymptotic_cov_poisson(double alpha, double lambda) {
  check_alpha(alpha, "alpha");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  const double a = alpha;
  Eigen::Matrix2d b;
  b(0, 0) = a * (1.0 - a) * (1.0 - a) / lambda + 1.0 - a * a;
  b(0, 1) = -(1.0 + a) * lambda;
  b(1, 0) = b(0, 1);
  b(1, 1) = lambda + (1.0 + a) / (1.0 - a) * lambda * lambda;
  return b;
}

Eigen::Vector3d stationary_raw_moments(double alpha, const MarginalSpec& m) {
  const double a = alpha;
  const double lam = m.lambda();
  const double s2 = m.variance();
  const double er3 = third_moment(m);
  const double var_x = (s2 + a * lam) / (1.0 - a * a);
  const double ex = lam / (1.0 - a);
  const double ex2 = var_x + ex * ex;
  const double ex3 = (er3 - 3.0 * s2 * (1.0 + lam) - lam * lam * lam + 2.0 * lam) /
                         (1.0 - a * a * a) +
                     3.0 * var_x - 2.0 * ex + 3.0 * lam * var_x / (1.0 - a) + ex * ex * ex;
  return {ex, ex2, ex3};
}

Eigen::Matrix2d cls_asymptotic_cov_general(double alpha, const MarginalSpec& m) {
  check_alpha(alpha, "alpha");
  const Eigen::Vector3d ex = stationary_raw_moments(alpha, m);
  Eigen::Matrix2d moment;
  moment << ex(1), ex(0), ex(0), 1.0;
  Eigen::Matrix2d third;
  third << ex(2), ex(1), ex(1), ex(0);
  const Eigen::Matrix2d a = alpha * (1.0 - alpha) * third + m.variance() * moment;

  Eigen::Matrix2d inv;
  bool invertible = false;
  double det = 0.0;
  moment.computeInverseAndDetWithCheck(inv, det, invertible, 1e-300);
  if (!invertible) throw NumericalError("singular moment matrix in CLS asymptotics");
  return inv * a * inv;
}

}  // namespace binar
