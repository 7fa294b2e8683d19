#include "binar/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "binar/errors.hpp"

namespace binar {

namespace {

constexpr double kThirdMomentTail = 1e-12;
constexpr std::int64_t kThirdMomentCap = 100000;

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

MarginalSpec MarginalSpec::poisson(double lambda) {
  if (!positive_finite(lambda)) {
    throw std::invalid_argument("Poisson marginal requires lambda > 0");
  }
  return MarginalSpec(MarginalKind::Poisson, lambda, lambda);
}

MarginalSpec MarginalSpec::negbin(double lambda, double sigma2) {
  if (!positive_finite(lambda)) {
    throw std::invalid_argument("NegBin marginal requires lambda > 0");
  }
  if (!std::isfinite(sigma2) || !(sigma2 > lambda)) {
    throw std::invalid_argument("NegBin marginal requires sigma2 > lambda (overdispersion)");
  }
  return MarginalSpec(MarginalKind::NegBin, lambda, sigma2);
}

double MarginalSpec::size() const { return lambda_ * lambda_ / (sigma2_ - lambda_); }

double MarginalSpec::prob() const { return lambda_ / sigma2_; }

std::string MarginalSpec::name() const {
  return kind_ == MarginalKind::Poisson ? "poisson" : "negbin";
}

double log_pmf(const MarginalSpec& m, std::int64_t k) {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  const double kd = static_cast<double>(k);
  if (m.kind() == MarginalKind::Poisson) {
    return kd * std::log(m.lambda()) - m.lambda() - std::lgamma(kd + 1.0);
  }
  const double r = m.size();
  const double p = m.prob();
  return std::lgamma(kd + r) - std::lgamma(r) - std::lgamma(kd + 1.0) + r * std::log(p) +
         kd * std::log1p(-p);
}

double pmf(const MarginalSpec& m, std::int64_t k) {
  if (k < 0) return 0.0;
  return std::exp(log_pmf(m, k));
}

double cdf(const MarginalSpec& m, std::int64_t k) {
  double acc = 0.0;
  for (std::int64_t j = 0; j <= k; ++j) acc = std::min(acc + pmf(m, j), 1.0);
  return acc;
}

namespace {

// Shared scan used by quantile() and MarginalTable::quantile(): walks the
// running sum from `start` with accumulated cdf `acc` up to start-1.
std::int64_t scan_quantile(const MarginalSpec& m, double u, std::int64_t start, double acc) {
  const double mean = m.lambda();
  for (std::int64_t k = start;; ++k) {
    const double prev = acc;
    acc = std::min(acc + pmf(m, k), 1.0);
    if (acc >= u) return k;
    // Running sum has saturated below u: the remaining mass is below double
    // resolution, so the current k is the numerically attainable answer.
    if (acc == prev && static_cast<double>(k) > mean) return k;
  }
}

}  // namespace

std::int64_t quantile(const MarginalSpec& m, double u) {
  if (!(u >= 0.0) || !(u < 1.0)) {
    throw std::invalid_argument("quantile requires u in [0, 1)");
  }
  return scan_quantile(m, u, 0, 0.0);
}

double third_moment(const MarginalSpec& m) {
  const double lam = m.lambda();
  if (m.kind() == MarginalKind::Poisson) return lam * lam * lam + 3.0 * lam * lam + lam;
  const std::int64_t upper = std::min(quantile(m, 1.0 - kThirdMomentTail), kThirdMomentCap);
  double acc = 0.0;
  for (std::int64_t k = 1; k <= upper; ++k) {
    const double kd = static_cast<double>(k);
    acc += kd * kd * kd * pmf(m, k);
  }
  return acc;
}

MarginalTable::MarginalTable(const MarginalSpec& m, std::int64_t upper) : spec_(m) {
  if (upper < 0) throw std::invalid_argument("MarginalTable upper bound must be >= 0");
  pmf_.resize(static_cast<std::size_t>(upper) + 1);
  cdf_.resize(pmf_.size());
  double acc = 0.0;
  for (std::int64_t k = 0; k <= upper; ++k) {
    const auto i = static_cast<std::size_t>(k);
    pmf_[i] = binar::pmf(m, k);
    acc = std::min(acc + pmf_[i], 1.0);
    cdf_[i] = acc;
  }
}

MarginalTable MarginalTable::covering(const MarginalSpec& m, double tail, std::int64_t cap) {
  const std::int64_t q = binar::quantile(m, 1.0 - tail);
  return MarginalTable(m, std::min(q, cap));
}

std::int64_t MarginalTable::quantile(double u) const {
  if (!(u >= 0.0) || !(u < 1.0)) {
    throw std::invalid_argument("quantile requires u in [0, 1)");
  }
  if (u <= cdf_.back()) {
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::int64_t>(it - cdf_.begin());
  }
  return scan_quantile(spec_, u, upper() + 1, cdf_.back());
}

double bivpoisson_pmf(std::int64_t k, std::int64_t l, double lambda1, double lambda2,
                      double lambda) {
  if (!positive_finite(lambda1) || !positive_finite(lambda2) || !(lambda >= 0.0) ||
      !(lambda < std::min(lambda1, lambda2))) {
    throw std::invalid_argument(
        "bivariate Poisson requires lambda1, lambda2 > 0 and 0 <= lambda < min(lambda1, lambda2)");
  }
  if (k < 0 || l < 0) return 0.0;
  const double log_a = std::log(lambda1 - lambda);
  const double log_b = std::log(lambda2 - lambda);
  const double base = -(lambda1 + lambda2 - lambda);
  const std::int64_t top = lambda > 0.0 ? std::min(k, l) : 0;
  double acc = 0.0;
  for (std::int64_t i = 0; i <= top; ++i) {
    const double ki = static_cast<double>(k - i);
    const double li = static_cast<double>(l - i);
    const double id = static_cast<double>(i);
    double lt = ki * log_a + li * log_b - std::lgamma(ki + 1.0) - std::lgamma(li + 1.0) -
                std::lgamma(id + 1.0) + base;
    if (i > 0) lt += id * std::log(lambda);
    acc += std::exp(lt);
  }
  return acc;
}

double bivnegbin_pmf(std::int64_t k, std::int64_t l, double lambda1, double lambda2,
                     double beta) {
  if (!positive_finite(lambda1) || !positive_finite(lambda2) || !positive_finite(beta)) {
    throw std::invalid_argument("bivariate negative binomial requires positive parameters");
  }
  if (k < 0 || l < 0) return 0.0;
  const double kd = static_cast<double>(k);
  const double ld = static_cast<double>(l);
  const double s = lambda1 + lambda2 + beta;
  const double lp = std::lgamma(beta + kd + ld) - std::lgamma(beta) - std::lgamma(kd + 1.0) -
                    std::lgamma(ld + 1.0) + kd * std::log(lambda1 / s) +
                    ld * std::log(lambda2 / s) + beta * std::log(beta / s);
  return std::exp(lp);
}

}  // namespace binar
