#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include <gtest/gtest.h>

#include "binar/errors.hpp"
#include "binar/io.hpp"
#include "binar/stats.hpp"

using namespace binar;

namespace {

CountSeries series(std::initializer_list<std::int64_t> v) {
  CountSeries x(static_cast<Eigen::Index>(v.size()));
  std::copy(v.begin(), v.end(), x.data());
  return x;
}

SeriesPair fixture() { return read_series_csv_file(std::string(BINAR_TEST_DATA_DIR) + "/loan_like.csv"); }

}  // namespace

TEST(SummaryStats, SmallSeries) {
  const auto s = summary_stats(series({1, 2, 3}));
  EXPECT_EQ(s.min, 1.0);
  EXPECT_EQ(s.max, 3.0);
  EXPECT_EQ(s.mean, 2.0);
  EXPECT_EQ(s.variance, 1.0);
  EXPECT_EQ(summary_stats(series({7})).variance, 0.0);
}

TEST(Acf, SmallSeries) {
  const Eigen::VectorXd r = acf(series({1, 2, 1, 2}), 1);
  EXPECT_EQ(r(0), 1.0);
  EXPECT_NEAR(r(1), -0.75, 1e-15);
}

TEST(Acf, Errors) {
  EXPECT_THROW(acf(series({1, 2, 1, 2}), 2), std::invalid_argument);
  EXPECT_THROW(acf(series({3, 3, 3, 3, 3}), 1), NumericalError);
}

TEST(Pacf, LagOneEqualsAcfAndAr1CutsOff) {
  const auto d = fixture();
  const Eigen::VectorXd r = acf(d.x1, 5);
  const Eigen::VectorXd p = pacf(d.x1, 5);
  EXPECT_EQ(p.size(), 5);
  EXPECT_NEAR(p(0), r(1), 1e-15);
  // Lag 2 from the 2x2 Yule-Walker solution.
  EXPECT_NEAR(p(1), (r(2) - r(1) * r(1)) / (1 - r(1) * r(1)), 1e-14);
}

TEST(Golden, LoanLikeFixture) {
  const auto d = fixture();
  ASSERT_EQ(d.size(), 115);
  const auto s1 = summary_stats(d.x1);
  EXPECT_EQ(s1.min, 0.0);
  EXPECT_EQ(s1.max, 19.0);
  EXPECT_NEAR(s1.mean, 5.478260869565218, 1e-12);
  EXPECT_NEAR(s1.variance, 12.286803966437835, 1e-12);
  const auto s2 = summary_stats(d.x2);
  EXPECT_EQ(s2.min, 6.0);
  EXPECT_EQ(s2.max, 44.0);
  EXPECT_NEAR(s2.mean, 20.921739130434784, 1e-12);
  EXPECT_NEAR(s2.variance, 82.283295194508, 1e-12);

  const double acf1[] = {1.0, 0.6278165858714545, 0.24961131924725488, -0.041835814772027934,
                         -0.0916017965688127, -0.17383611707928007};
  const double pacf1[] = {0.6278165858714545, -0.23857922053155656, -0.15077971465428794,
                          0.11528670007014956, -0.22180048015767329};
  const double acf2[] = {1.0, 0.7145573381873325, 0.5045438368535227, 0.3214683943924283,
                         0.23271462900835205, 0.17217171078400198};
  const double pacf2[] = {0.7145573381873325, -0.012358512828744724, -0.0708756517290945,
                          0.06461951115143327, 0.009091405150227416};
  const Eigen::VectorXd a1 = acf(d.x1, 5), a2 = acf(d.x2, 5);
  const Eigen::VectorXd p1 = pacf(d.x1, 5), p2 = pacf(d.x2, 5);
  for (int h = 0; h <= 5; ++h) {
    EXPECT_NEAR(a1(h), acf1[h], 1e-12);
    EXPECT_NEAR(a2(h), acf2[h], 1e-12);
  }
  for (int h = 0; h < 5; ++h) {
    EXPECT_NEAR(p1(h), pacf1[h], 1e-12);
    EXPECT_NEAR(p2(h), pacf2[h], 1e-12);
  }
}

TEST(AcfCsv, Layout) {
  std::ostringstream os;
  write_acf_csv(series({1, 2, 1, 2, 3, 1, 2, 2}), 2, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "lag,acf,pacf,lower,upper");
  std::getline(is, line);
  EXPECT_EQ(line.substr(0, 4), "0,1,");
  int rows = 1;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST(SummaryStats, ConstantAndEmpty) {
  const auto s = summary_stats(series({4, 4, 4, 4}));
  EXPECT_EQ(s.min, 4.0);
  EXPECT_EQ(s.max, 4.0);
  EXPECT_EQ(s.mean, 4.0);
  EXPECT_EQ(s.variance, 0.0);
  EXPECT_THROW(summary_stats(CountSeries()), std::invalid_argument);
}

TEST(Acf, WhiteNoise) {
  const BinarModel m{0.0, 0.0, InnovationModel{MarginalSpec::poisson(2), MarginalSpec::poisson(2),
                                               CopulaSpec::product()}};
  const auto d = simulate(m, 100000, 0, 8);
  const Eigen::VectorXd r = acf(d.x1, 10);
  for (int h = 1; h <= 10; ++h) EXPECT_LT(std::abs(r(h)), 4 / std::sqrt(1e5)) << h;
}

TEST(Acf, Inar1GeometricDecayAndPacfCutoff) {
  const BinarModel m{0.6, 0.6, InnovationModel{MarginalSpec::poisson(1), MarginalSpec::poisson(1),
                                               CopulaSpec::product()}};
  const auto d = simulate(m, 100000, kDefaultBurnin, 9);
  const Eigen::VectorXd r = acf(d.x1, 5);
  const Eigen::VectorXd p = pacf(d.x1, 5);
  // Bartlett variance of r(h) for an AR(1) with coefficient a.
  const double a = 0.6;
  for (int h = 1; h <= 3; ++h) {
    const double ah = std::pow(a, h);
    const double var = ((1 + a * a) * (1 - std::pow(a, 2 * h)) / (1 - a * a) - 2 * h * std::pow(a, 2 * h)) / 1e5;
    EXPECT_NEAR(r(h), ah, 3 * std::sqrt(var)) << h;
  }
  EXPECT_NEAR(p(0), 0.6, 3 * std::sqrt((1 - a * a) / 1e5));
  for (int h = 2; h <= 5; ++h) EXPECT_LT(std::abs(p(h - 1)), 4 / std::sqrt(1e5)) << h;
}

TEST(Golden, FixtureRegeneratesFromSeededModel) {
  const std::string dir = BINAR_TEST_DATA_DIR;
  const BinarModel m = parse_model_json(read_text_file(dir + "/loan_like_model.json"));
  const auto d = simulate(m, 115, kDefaultBurnin, 115);
  const auto f = fixture();
  EXPECT_EQ(d.x1, f.x1);
  EXPECT_EQ(d.x2, f.x2);
}
