#include <cmath>
#include <limits>
#include <stdexcept>

#include <gtest/gtest.h>

#include "binar/optimizer.hpp"

using namespace binar;

namespace {

Bounds box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  Bounds b;
  b.lower = Eigen::Map<const Eigen::VectorXd>(lo.begin(), static_cast<Eigen::Index>(lo.size()));
  b.upper = Eigen::Map<const Eigen::VectorXd>(hi.begin(), static_cast<Eigen::Index>(hi.size()));
  return b;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.begin(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

TEST(Minimize, OneDimensionalQuadratic) {
  const auto r = minimize([](const Eigen::VectorXd& x) { return (x(0) - 2) * (x(0) - 2); },
                          box({1}, {5}), vec({4.5}));
  EXPECT_NEAR(r.argmin(0), 2.0, 1e-6);
  EXPECT_NEAR(r.value, 0.0, 1e-10);
  EXPECT_GT(r.evals, 0);
}

TEST(Minimize, BoundedBowlInterior) {
  const Eigen::VectorXd c = vec({0.3, -1.2, 2.5});
  const auto f = [&](const Eigen::VectorXd& x) {
    return (x - c).squaredNorm() + 0.5 * (x(0) - c(0)) * (x(1) - c(1));
  };
  const auto r = minimize(f, box({-3, -3, -3}, {3, 3, 3}), vec({2, 2, -2}));
  EXPECT_LT((r.argmin - c).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Minimize, ActiveBoundIsRespected) {
  std::vector<Eigen::VectorXd> seen;
  const Bounds b = box({0, 0}, {1, 1});
  const auto f = [&](const Eigen::VectorXd& x) {
    seen.push_back(x);
    return (x(0) - 3) * (x(0) - 3) + (x(1) - 0.4) * (x(1) - 0.4);
  };
  const auto r = minimize(f, b, vec({0.5, 0.5}));
  EXPECT_NEAR(r.argmin(0), 1.0, 1e-7);
  EXPECT_NEAR(r.argmin(1), 0.4, 1e-5);
  for (const auto& x : seen) EXPECT_TRUE(b.contains(x));
}

TEST(Minimize, NanTreatedAsInfinity) {
  const auto f = [](const Eigen::VectorXd& x) {
    if (x(0) < 0.5) return std::numeric_limits<double>::quiet_NaN();
    return (x(0) - 1) * (x(0) - 1);
  };
  const auto r = minimize(f, box({0}, {3}), vec({2.5}));
  EXPECT_NEAR(r.argmin(0), 1.0, 1e-6);
}

TEST(Minimize, BudgetExhaustionCarriesBestPoint) {
  OptimizerSpec opt;
  opt.max_evals = 15;
  const auto f = [](const Eigen::VectorXd& x) {
    return 100 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1 - x(0), 2);
  };
  try {
    minimize(f, box({-2, -2}, {2, 2}), vec({-1.5, 1.5}), opt);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_EQ(e.best().argmin.size(), 2);
    EXPECT_LE(e.best().value, f(vec({-1.5, 1.5})));
  }
}

TEST(Minimize, RejectsInvalidInputs) {
  const auto f = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  EXPECT_THROW(minimize(f, box({0}, {1}), vec({2})), std::invalid_argument);
  EXPECT_THROW(minimize(f, box({0}, {1}), vec({0.5, 0.5})), std::invalid_argument);
  EXPECT_THROW(minimize(f, box({1}, {0}), vec({0.5})), std::invalid_argument);
}

TEST(Bounds, ProjectAndContains) {
  const Bounds b = box({0, -1}, {1, 1});
  EXPECT_TRUE(b.contains(vec({0, 1})));
  EXPECT_FALSE(b.contains(vec({1.1, 0})));
  const Eigen::VectorXd p = b.project(vec({2, -5}));
  EXPECT_EQ(p(0), 1.0);
  EXPECT_EQ(p(1), -1.0);
}

TEST(Minimize, LeavesBoundNearInteriorKink) {
  // Reflection and outside contraction both project back onto the start.
  const auto r = minimize([](const Eigen::VectorXd& x) { return std::abs(x(0) + 0.9787); },
                          box({-1}, {1}), vec({-1}));
  EXPECT_NEAR(r.argmin(0), -0.9787, 1e-7);
}
