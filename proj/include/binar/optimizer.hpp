#pragma once

#include <functional>
#include <string>

#include <Eigen/Core>

#include "binar/errors.hpp"

namespace binar {

/// Tolerances and evaluation budget for minimize().
struct OptimizerSpec {
  double x_tol = 1e-8;
  /// Relative to |f| at the best vertex.
  double f_tol = 1e-10;
  int max_evals = 100000;
  /// Restarts from the best vertex after apparent convergence.
  int restarts = 2;
};

/// Axis-aligned box; lower(i) <= upper(i) for every coordinate.
struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index size() const { return lower.size(); }
  bool contains(const Eigen::VectorXd& x) const;
  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
};

struct MinimizeResult {
  Eigen::VectorXd argmin;
  double value = 0.0;
  int evals = 0;
};

/// Thrown when the evaluation budget runs out. Carries the best point seen.
class NonConvergence : public NumericalError {
 public:
  NonConvergence(const std::string& what, MinimizeResult best)
      : NumericalError(what), best_(std::move(best)) {}
  const MinimizeResult& best() const { return best_; }

 private:
  MinimizeResult best_;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/**
 * Bounded Nelder-Mead.
 *
 * Every trial point is projected onto the box before it is evaluated, so the
 * objective never sees an out-of-bounds argument. NaN objective values are
 * treated as +inf. Stops when the spread of simplex values falls below
 * f_tol |f_best| or the simplex diameter falls below x_tol, then restarts
 * around the best vertex until a restart improves by no more than f_tol |f_best|.
 */
MinimizeResult minimize(const Objective& objective, const Bounds& bounds,
                        const Eigen::VectorXd& init, const OptimizerSpec& opt = {});

}  // namespace binar
