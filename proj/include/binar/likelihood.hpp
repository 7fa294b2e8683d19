#pragma once

#include <cstdint>
#include <vector>

#include "binar/process.hpp"

namespace binar {

/// Log-probability charged for a transition of zero model probability.
inline constexpr double kZeroCellLogProb = -690.7755278982137;  // log(1e-300)

struct LoglikResult {
  double value = 0.0;
  /// Transitions whose probability underflowed to zero (charged kZeroCellLogProb).
  std::int64_t zero_cells = 0;
};

/**
 * Conditional log-likelihood of a fixed data set, reusable across models.
 *
 * The transition (x_{t-1}, x_t) tuples are aggregated with multiplicities at
 * construction, so each evaluation costs one joint pmf grid plus one double
 * binomial convolution per distinct transition.
 */
class ConditionalLikelihood {
 public:
  explicit ConditionalLikelihood(const SeriesPair& data);

  LoglikResult evaluate(const BinarModel& model) const;
  double operator()(const BinarModel& model) const { return evaluate(model).value; }

  /// P(X_t = cur | X_{t-1} = prev) for a single transition.
  static double transition_probability(const BinarModel& model, std::int64_t prev1,
                                       std::int64_t prev2, std::int64_t cur1,
                                       std::int64_t cur2);

 private:
  struct Transition {
    std::int64_t prev1, prev2, cur1, cur2;
    double count;
  };
  std::vector<Transition> transitions_;
  std::int64_t max_cur1_ = 0;
  std::int64_t max_cur2_ = 0;
  std::int64_t max_prev1_ = 0;
  std::int64_t max_prev2_ = 0;
  std::vector<double> log_factorial_;
};

/// Sum over t = 2..N of log P(X_t | X_{t-1}); conditions on the first pair.
double conditional_loglik(const BinarModel& model, const SeriesPair& pair);

}  // namespace binar
