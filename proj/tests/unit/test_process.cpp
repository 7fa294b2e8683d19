#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "binar/process.hpp"
#include "oracles.hpp"

using namespace binar;

namespace {

BinarModel poisson_design(CopulaSpec c) {
  return {0.6, 0.4, InnovationModel{MarginalSpec::poisson(1), MarginalSpec::poisson(2), c}};
}

std::vector<double> as_double(const CountSeries& x) {
  return std::vector<double>(x.data(), x.data() + x.size());
}

}  // namespace

TEST(Thin, Degenerate) {
  RandomStream rng(1);
  EXPECT_EQ(thin(0.7, 0, rng), 0);
  EXPECT_EQ(thin(0.0, 25, rng), 0);
  EXPECT_THROW(thin(1.5, 3, rng), std::invalid_argument);
  EXPECT_THROW(thin(0.5, -1, rng), std::invalid_argument);
}

TEST(Thin, MeanOfFixedCount) {
  RandomStream rng(2);
  std::vector<double> v(100000);
  for (auto& y : v) y = static_cast<double>(thin(0.6, 10, rng));
  const auto ms = oracle::mean_se(v);
  EXPECT_NEAR(ms.mean, 6.0, 3 * ms.se);
}

TEST(Thin, MomentsOverPoissonInput) {
  for (double alpha : {0.2, 0.6}) {
    RandomStream rng(3);
    InnovationSampler src(InnovationModel{MarginalSpec::poisson(3), MarginalSpec::poisson(1),
                                          CopulaSpec::product()});
    const int n = 100000;
    std::vector<double> y(n), sq(n);
    for (int i = 0; i < n; ++i) y[i] = static_cast<double>(thin(alpha, src(rng).first, rng));
    const auto m = oracle::mean_se(y);
    EXPECT_NEAR(m.mean, alpha * 3.0, 3 * m.se);
    for (int i = 0; i < n; ++i) sq[i] = (y[i] - m.mean) * (y[i] - m.mean);
    const auto v = oracle::mean_se(sq);
    EXPECT_NEAR(v.mean, alpha * alpha * 3.0 + alpha * (1 - alpha) * 3.0, 3 * v.se);
  }
}

TEST(Thin, CompositionInDistribution) {
  RandomStream rng(4);
  std::vector<std::int64_t> nested, direct;
  for (int i = 0; i < 100000; ++i) {
    nested.push_back(thin(0.5, thin(0.7, 12, rng), rng));
    direct.push_back(thin(0.35, 12, rng));
  }
  EXPECT_GT(oracle::two_sample_chi2(nested, direct), 0.001);
}

TEST(Simulate, ValidatesInputs) {
  BinarModel bad = poisson_design(CopulaSpec::fgm(0.5));
  bad.alpha1 = 1.0;
  EXPECT_THROW(simulate(bad, 10, 0, 1), std::invalid_argument);
  EXPECT_THROW(simulate(poisson_design(CopulaSpec::fgm(0.5)), 0, 0, 1), std::invalid_argument);
}

TEST(Simulate, DeterministicPerSeed) {
  const auto m = poisson_design(CopulaSpec::frank(-1));
  const auto a = simulate(m, 300, 50, 17);
  const auto b = simulate(m, 300, 50, 17);
  const auto c = simulate(m, 300, 50, 18);
  EXPECT_EQ(a.x1, b.x1);
  EXPECT_EQ(a.x2, b.x2);
  EXPECT_NE(a.x1, c.x1);
  EXPECT_EQ(a.size(), 300);
}

TEST(Simulate, ZeroAlphaGivesInnovations) {
  const BinarModel m{0.0, 0.0, InnovationModel{MarginalSpec::poisson(1), MarginalSpec::poisson(2),
                                               CopulaSpec::product()}};
  const auto p = simulate(m, 20000, 0, 5);
  std::vector<double> obs(2, 0.0);
  std::vector<std::int64_t> a(p.x1.data(), p.x1.data() + p.size());
  std::vector<std::int64_t> b;
  RandomStream rng(6);
  InnovationSampler s(m.innovations);
  for (int i = 0; i < 20000; ++i) b.push_back(s(rng).first);
  EXPECT_GT(oracle::two_sample_chi2(a, b), 0.001);
  // No serial dependence at alpha = 0.
  double c = 0.0;
  const double mean = p.x1.cast<double>().mean();
  for (Eigen::Index t = 1; t < p.size(); ++t) c += (p.x1(t) - mean) * (p.x1(t - 1) - mean);
  EXPECT_LT(std::abs(c / (p.x1.cast<double>().array() - mean).square().sum()), 4 / std::sqrt(20000.0));
}

TEST(Simulate, StationaryMeanAndLagOne) {
  const auto m = poisson_design(CopulaSpec::fgm(-0.5));
  const auto p = simulate(m, 100000, kDefaultBurnin, 8);
  const auto bm = oracle::batch_mean_se(as_double(p.x1));
  EXPECT_NEAR(bm.mean, 2.5, 3 * bm.se);
  const double mean = bm.mean;
  std::vector<double> lag(p.size() - 1), var(p.size() - 1);
  for (Eigen::Index t = 1; t < p.size(); ++t) {
    lag[t - 1] = (p.x1(t) - mean) * (p.x1(t - 1) - mean);
    var[t - 1] = (p.x1(t) - mean) * (p.x1(t) - mean);
  }
  const auto cov = oracle::batch_mean_se(lag);
  EXPECT_NEAR(cov.mean / 2.5, 0.6, 3 * cov.se / 2.5);
}

TEST(TheoreticalMoments, ReferenceValues) {
  const BinarModel single{0.6, 0.6, InnovationModel{MarginalSpec::poisson(1), MarginalSpec::poisson(1),
                                                    CopulaSpec::product()}};
  const auto s = theoretical_moments(single);
  EXPECT_NEAR(s.mean(0), 2.5, 1e-12);
  EXPECT_NEAR(s.variance(0), 2.5, 1e-12);
  EXPECT_NEAR(s.cross_cov, 0.0, 1e-10);
  EXPECT_NEAR(s.autocorr(0, 3), 0.216, 1e-12);

  const auto m = poisson_design(CopulaSpec::frank(2));
  const auto t = theoretical_moments(m);
  const double gamma = innovation_covariance(m.innovations);
  EXPECT_NEAR(t.innovation_cov, gamma, 1e-14);
  EXPECT_NEAR(t.cross_cov, gamma / 0.76, 1e-12);
  EXPECT_NEAR(t.cross_corr, t.cross_cov / std::sqrt(t.variance(0) * t.variance(1)), 1e-12);
  EXPECT_NEAR(t.cross_cov_lag(0, 2), 0.16 * gamma / 0.76, 1e-12);
  EXPECT_NEAR(t.cross_cov_lag(1, 2), 0.36 * gamma / 0.76, 1e-12);

  const BinarModel nb{0.3, 0.5, InnovationModel{MarginalSpec::negbin(2, 9), MarginalSpec::poisson(1),
                                                CopulaSpec::product()}};
  const auto u = theoretical_moments(nb);
  EXPECT_NEAR(u.variance(0), (9 + 0.3 * 2) / (1 - 0.09), 1e-12);
}

TEST(AsymptoticCov, PoissonClosedForm) {
  const Eigen::Matrix2d b = cls_asymptotic_cov_poisson(0.6, 1.0);
  EXPECT_NEAR(b(0, 0), 0.736, 1e-12);
  EXPECT_NEAR(b(0, 1), -1.6, 1e-12);
  EXPECT_NEAR(b(1, 0), -1.6, 1e-12);
  EXPECT_NEAR(b(1, 1), 5.0, 1e-12);
  const Eigen::Matrix2d z = cls_asymptotic_cov_poisson(0.0, 2.0);
  EXPECT_NEAR(z(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(z(0, 1), -2.0, 1e-12);
  EXPECT_NEAR(z(1, 1), 6.0, 1e-12);
}

TEST(AsymptoticCov, GeneralMatchesPoisson) {
  for (double a : {0.0, 0.2, 0.6, 0.9}) {
    for (double l : {0.5, 1.0, 2.0, 5.6}) {
      const Eigen::Matrix2d g = cls_asymptotic_cov_general(a, MarginalSpec::poisson(l));
      const Eigen::Matrix2d p = cls_asymptotic_cov_poisson(a, l);
      EXPECT_LT((g - p).cwiseAbs().maxCoeff(), 1e-8) << a << " " << l;
    }
  }
}

TEST(AsymptoticCov, GeneralNegBinReference) {
  const Eigen::Matrix2d b = cls_asymptotic_cov_general(0.5, MarginalSpec::negbin(1, 2));
  EXPECT_NEAR(b(0, 0), 0.93642857, 1e-7);
  EXPECT_NEAR(b(0, 1), -1.62285714, 1e-7);
  EXPECT_NEAR(b(1, 1), 5.24571429, 1e-7);
  // alpha = 0: B = sigma2 * M^-1 with M = [[E X^2, E X], [E X, 1]].
  const auto m = MarginalSpec::negbin(2, 9);
  Eigen::Matrix2d M;
  M << 9 + 4, 2, 2, 1;
  const Eigen::Matrix2d b0 = cls_asymptotic_cov_general(0.0, m);
  EXPECT_LT((b0 - 9 * M.inverse()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(StationaryRawMoments, PoissonInnovationsGivePoissonMarginal) {
  // INAR(1) with Poisson innovations is Poisson(lambda / (1 - alpha)).
  const Eigen::Vector3d r = stationary_raw_moments(0.6, MarginalSpec::poisson(1));
  const double mu = 2.5;
  EXPECT_NEAR(r(0), mu, 1e-12);
  EXPECT_NEAR(r(1), mu + mu * mu, 1e-12);
  EXPECT_NEAR(r(2), mu * mu * mu + 3 * mu * mu + mu, 1e-10);
}
