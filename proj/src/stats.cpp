#include "binar/stats.hpp"

#include <cmath>
#include <iomanip>
#include <stdexcept>

#include "binar/errors.hpp"

namespace binar {

SummaryStats summary_stats(const CountSeries& x) {
  if (x.size() == 0) throw std::invalid_argument("summary statistics of an empty series");
  const Eigen::ArrayXd v = x.cast<double>().array();
  SummaryStats s;
  s.min = v.minCoeff();
  s.max = v.maxCoeff();
  s.mean = v.mean();
  if (v.size() > 1) s.variance = (v - s.mean).square().sum() / static_cast<double>(v.size() - 1);
  return s;
}

Eigen::VectorXd acf(const CountSeries& x, Eigen::Index maxlag) {
  const Eigen::Index n = x.size();
  if (maxlag < 0 || 2 * maxlag >= n) {
    throw std::invalid_argument("acf: maxlag must satisfy 0 <= maxlag < N/2");
  }
  const Eigen::ArrayXd d = x.cast<double>().array() - x.cast<double>().mean();
  const double c0 = d.square().sum();
  if (!(c0 > 0.0)) throw NumericalError("acf: constant series");
  Eigen::VectorXd r(maxlag + 1);
  for (Eigen::Index h = 0; h <= maxlag; ++h) {
    r(h) = (d.head(n - h) * d.tail(n - h)).sum() / c0;
  }
  return r;
}

Eigen::VectorXd pacf(const CountSeries& x, Eigen::Index maxlag) {
  if (maxlag < 1) throw std::invalid_argument("pacf: maxlag must be >= 1");
  const Eigen::VectorXd r = acf(x, maxlag);
  Eigen::VectorXd out(maxlag);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(maxlag + 1);
  Eigen::VectorXd prev = phi;
  for (Eigen::Index k = 1; k <= maxlag; ++k) {
    double num = r(k);
    double den = 1.0;
    for (Eigen::Index j = 1; j < k; ++j) {
      num -= prev(j) * r(k - j);
      den -= prev(j) * r(j);
    }
    phi(k) = num / den;
    for (Eigen::Index j = 1; j < k; ++j) phi(j) = prev(j) - phi(k) * prev(k - j);
    out(k - 1) = phi(k);
    prev = phi;
  }
  return out;
}

void write_acf_csv(const CountSeries& x, Eigen::Index maxlag, std::ostream& os) {
  const Eigen::VectorXd r = acf(x, maxlag);
  const Eigen::VectorXd p = maxlag >= 1 ? pacf(x, maxlag) : Eigen::VectorXd();
  const double band = 1.96 / std::sqrt(static_cast<double>(x.size()));
  const auto flags = os.flags();
  os << std::setprecision(17);
  os << "lag,acf,pacf,lower,upper\n";
  for (Eigen::Index h = 0; h <= maxlag; ++h) {
    os << h << ',' << r(h) << ',';
    if (h > 0) os << p(h - 1);
    os << ',' << -band << ',' << band << '\n';
  }
  os.flags(flags);
}

}  // namespace binar
