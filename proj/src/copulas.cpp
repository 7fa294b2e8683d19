#include "binar/copulas.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "binar/errors.hpp"

namespace binar {

namespace {

constexpr double kNegativeCellTolerance = 1e-12;
constexpr double kAdaptiveTail = 1e-10;
constexpr std::int64_t kAdaptiveCap = 500;

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

bool near_independence(const CopulaSpec& c) {
  return c.family == CopulaFamily::Product ||
         ((c.family == CopulaFamily::Frank || c.family == CopulaFamily::Clayton) &&
          std::abs(c.theta) < kIndependenceLimit);
}

}  // namespace

std::string to_string(CopulaFamily family) {
  switch (family) {
    case CopulaFamily::Product: return "product";
    case CopulaFamily::FGM: return "fgm";
    case CopulaFamily::Frank: return "frank";
    case CopulaFamily::Clayton: return "clayton";
  }
  return "unknown";
}

CopulaFamily parse_copula_family(const std::string& name) {
  if (name == "product") return CopulaFamily::Product;
  if (name == "fgm") return CopulaFamily::FGM;
  if (name == "frank") return CopulaFamily::Frank;
  if (name == "clayton") return CopulaFamily::Clayton;
  throw std::invalid_argument("unknown copula family '" + name + "'");
}

CopulaSpec CopulaSpec::fgm(double theta) {
  CopulaSpec c{CopulaFamily::FGM, theta};
  c.validate();
  return c;
}

CopulaSpec CopulaSpec::frank(double theta) {
  CopulaSpec c{CopulaFamily::Frank, theta};
  c.validate();
  return c;
}

CopulaSpec CopulaSpec::clayton(double theta) {
  CopulaSpec c{CopulaFamily::Clayton, theta};
  c.validate();
  return c;
}

void CopulaSpec::validate() const {
  if (family == CopulaFamily::Product) return;
  if (!std::isfinite(theta)) throw std::invalid_argument("copula theta must be finite");
  switch (family) {
    case CopulaFamily::FGM:
      if (theta < -1.0 || theta > 1.0) {
        throw std::invalid_argument("FGM theta must lie in [-1, 1]");
      }
      break;
    case CopulaFamily::Frank:
      if (theta == 0.0) throw std::invalid_argument("Frank theta must be nonzero");
      break;
    case CopulaFamily::Clayton:
      if (theta < -1.0 || theta == 0.0) {
        throw std::invalid_argument("Clayton theta must lie in [-1, inf) \\ {0}");
      }
      break;
    case CopulaFamily::Product:
      break;
  }
}

double copula_cdf(const CopulaSpec& c, double u, double v) {
  if (u <= 0.0 || v <= 0.0) return 0.0;
  if (u >= 1.0) return std::min(v, 1.0);
  if (v >= 1.0) return u;
  switch (c.family) {
    case CopulaFamily::Product: return u * v;
    case CopulaFamily::FGM: return kernels::fgm(u, v, c.theta);
    case CopulaFamily::Frank: return kernels::frank(u, v, c.theta);
    case CopulaFamily::Clayton: return kernels::clayton(u, v, c.theta);
  }
  return u * v;
}

double copula_conditional(const CopulaSpec& c, double u, double v) {
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 1.0;
  if (near_independence(c)) return v;
  const double theta = c.theta;
  switch (c.family) {
    case CopulaFamily::FGM:
      return clamp01(v * (1.0 + theta * (1.0 - 2.0 * u) * (1.0 - v)));
    case CopulaFamily::Frank: {
      const double num = std::exp(-theta * u) * std::expm1(-theta * v);
      const double den = std::expm1(-theta) + std::expm1(-theta * u) * std::expm1(-theta * v);
      return clamp01(num / den);
    }
    case CopulaFamily::Clayton: {
      const double lu = std::log(u);
      const double s = std::expm1(-theta * lu) + std::expm1(-theta * std::log(v));
      if (1.0 + s <= 0.0) return 0.0;
      return clamp01(std::exp((-theta - 1.0) * lu + (-1.0 / theta - 1.0) * std::log1p(s)));
    }
    case CopulaFamily::Product:
      break;
  }
  return v;
}

namespace {

double bisect_conditional(const CopulaSpec& c, double u, double w) {
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double h = copula_conditional(c, u, mid);
    if (std::abs(h - w) <= 1e-14) return mid;
    if (h < w) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double conditional_quantile(const CopulaSpec& c, double u, double w) {
  if (w <= 0.0) return 0.0;
  if (w >= 1.0) return 1.0;
  if (near_independence(c)) return w;
  const double theta = c.theta;
  switch (c.family) {
    case CopulaFamily::FGM: {
      const double a = theta * (1.0 - 2.0 * u);
      // Smaller root of a v^2 - (1 + a) v + w = 0, in cancellation-free form.
      const double b = 1.0 + a;
      return clamp01(2.0 * w / (b + std::sqrt(b * b - 4.0 * a * w)));
    }
    case CopulaFamily::Frank: {
      const double ratio = w * std::expm1(-theta) / (w + (1.0 - w) * std::exp(-theta * u));
      return clamp01(-std::log1p(ratio) / theta);
    }
    case CopulaFamily::Clayton: {
      if (theta < 0.0) return bisect_conditional(c, u, w);
      const double lu = std::log(u);
      const double a = -theta / (1.0 + theta) * (std::log(w) + (theta + 1.0) * lu);
      const double t = std::expm1(a) - std::expm1(-theta * lu);
      return clamp01(std::exp(-std::log1p(t) / theta));
    }
    case CopulaFamily::Product:
      break;
  }
  return bisect_conditional(c, u, w);
}

double joint_pmf(const InnovationModel& m, std::int64_t k, std::int64_t l) {
  if (k < 0 || l < 0) return 0.0;
  const double u1 = cdf(m.marginal1, k);
  const double u0 = cdf(m.marginal1, k - 1);
  const double v1 = cdf(m.marginal2, l);
  const double v0 = cdf(m.marginal2, l - 1);
  const CopulaSpec& c = m.copula;
  const double p = copula_cdf(c, u1, v1) - copula_cdf(c, u0, v1) - copula_cdf(c, u1, v0) +
                   copula_cdf(c, u0, v0);
  if (p < -kNegativeCellTolerance) {
    throw NumericalError("negative joint pmf cell from copula rectangle rule");
  }
  return std::max(p, 0.0);
}

Eigen::MatrixXd joint_pmf_grid(const CopulaSpec& c, const MarginalTable& t1,
                               const MarginalTable& t2) {
  const Eigen::Index rows = t1.upper() + 1;
  const Eigen::Index cols = t2.upper() + 1;
  if (c.family == CopulaFamily::Product) {
    Eigen::VectorXd p1(rows);
    Eigen::VectorXd p2(cols);
    for (Eigen::Index k = 0; k < rows; ++k) p1(k) = t1.pmf(k);
    for (Eigen::Index l = 0; l < cols; ++l) p2(l) = t2.pmf(l);
    return p1 * p2.transpose();
  }
  // cg(i, j) = C(F1(i - 1), F2(j - 1)); row/column 0 hold the F(-1) = 0 edge.
  Eigen::MatrixXd cg = Eigen::MatrixXd::Zero(rows + 1, cols + 1);
  for (Eigen::Index i = 1; i <= rows; ++i) {
    const double u = t1.cdf(i - 1);
    for (Eigen::Index j = 1; j <= cols; ++j) cg(i, j) = copula_cdf(c, u, t2.cdf(j - 1));
  }
  Eigen::MatrixXd grid = cg.bottomRightCorner(rows, cols) - cg.topRightCorner(rows, cols) -
                         cg.bottomLeftCorner(rows, cols) + cg.topLeftCorner(rows, cols);
  if (grid.minCoeff() < -kNegativeCellTolerance) {
    throw NumericalError("negative joint pmf cell from copula rectangle rule");
  }
  return grid.cwiseMax(0.0);
}

Eigen::MatrixXd joint_pmf_grid(const InnovationModel& m, std::int64_t k_max,
                               std::int64_t l_max) {
  return joint_pmf_grid(m.copula, MarginalTable(m.marginal1, k_max),
                        MarginalTable(m.marginal2, l_max));
}

InnovationSampler::InnovationSampler(const InnovationModel& m)
    : model_(m),
      table1_(MarginalTable::covering(m.marginal1, 1e-12)),
      table2_(MarginalTable::covering(m.marginal2, 1e-12)) {
  model_.validate();
}

std::pair<std::int64_t, std::int64_t> InnovationSampler::operator()(RandomStream& rng) const {
  const double u1 = rng.uniform();
  const double w = rng.uniform();
  const double u2 = conditional_quantile(model_.copula, u1, w);
  // u2 can round to exactly 1 in the far tail; step just inside.
  const double u2c = std::min(u2, std::nextafter(1.0, 0.0));
  return {table1_.quantile(u1), table2_.quantile(u2c)};
}

std::pair<std::int64_t, std::int64_t> sample_innovation_pair(const InnovationModel& m,
                                                             RandomStream& rng) {
  return InnovationSampler(m)(rng);
}

std::int64_t adaptive_truncation(const MarginalSpec& m) {
  return std::clamp<std::int64_t>(quantile(m, 1.0 - kAdaptiveTail), 1, kAdaptiveCap);
}

double innovation_covariance(const InnovationModel& m, std::int64_t M1, std::int64_t M2) {
  if (M1 < 1 || M2 < 1) throw std::invalid_argument("truncation bounds must be >= 1");
  const MarginalTable t1(m.marginal1, M1);
  const MarginalTable t2(m.marginal2, M2);
  const Eigen::MatrixXd grid = joint_pmf_grid(m.copula, t1, t2);
  const Eigen::VectorXd k = Eigen::VectorXd::LinSpaced(M1 + 1, 0.0, static_cast<double>(M1));
  const Eigen::VectorXd l = Eigen::VectorXd::LinSpaced(M2 + 1, 0.0, static_cast<double>(M2));
  // Truncated means: the product copula gives exactly zero and FGM gives
  // theta * D1 * D2 for every M1, M2.
  double mean1 = 0.0;
  double mean2 = 0.0;
  for (std::int64_t i = 1; i <= M1; ++i) mean1 += static_cast<double>(i) * t1.pmf(i);
  for (std::int64_t i = 1; i <= M2; ++i) mean2 += static_cast<double>(i) * t2.pmf(i);
  return k.dot(grid * l) - mean1 * mean2;
}

double innovation_covariance(const InnovationModel& m) {
  return innovation_covariance(m, adaptive_truncation(m.marginal1),
                               adaptive_truncation(m.marginal2));
}

}  // namespace binar
