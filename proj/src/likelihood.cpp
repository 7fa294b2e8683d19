#include "binar/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include <Eigen/Core>

namespace binar {

namespace {

// Row n holds P(alpha o n = k), k = 0..n.
Eigen::MatrixXd thinning_table(double alpha, std::int64_t max_n,
                               const std::vector<double>& log_fact) {
  const Eigen::Index dim = max_n + 1;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(dim, dim);
  if (alpha <= 0.0) {
    t.col(0).setOnes();
    return t;
  }
  const double la = std::log(alpha);
  const double lb = std::log1p(-alpha);
  for (Eigen::Index n = 0; n < dim; ++n) {
    for (Eigen::Index k = 0; k <= n; ++k) {
      const auto nk = static_cast<std::size_t>(n);
      const auto kk = static_cast<std::size_t>(k);
      t(n, k) = std::exp(log_fact[nk] - log_fact[kk] - log_fact[nk - kk] +
                         static_cast<double>(k) * la + static_cast<double>(n - k) * lb);
    }
  }
  return t;
}

double convolve(const Eigen::MatrixXd& thin1, const Eigen::MatrixXd& thin2,
                const Eigen::MatrixXd& joint, std::int64_t prev1, std::int64_t prev2,
                std::int64_t cur1, std::int64_t cur2) {
  const std::int64_t top1 = std::min(prev1, cur1);
  const std::int64_t top2 = std::min(prev2, cur2);
  double p = 0.0;
  for (std::int64_t k = 0; k <= top1; ++k) {
    const double b1 = thin1(prev1, k);
    if (b1 == 0.0) continue;
    double inner = 0.0;
    for (std::int64_t l = 0; l <= top2; ++l) inner += thin2(prev2, l) * joint(cur1 - k, cur2 - l);
    p += b1 * inner;
  }
  return p;
}

std::vector<double> log_factorials(std::int64_t upto) {
  std::vector<double> lf(static_cast<std::size_t>(upto) + 1);
  for (std::int64_t i = 0; i <= upto; ++i) {
    lf[static_cast<std::size_t>(i)] = std::lgamma(static_cast<double>(i) + 1.0);
  }
  return lf;
}

}  // namespace

ConditionalLikelihood::ConditionalLikelihood(const SeriesPair& data) {
  data.validate();
  std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t>, double> counts;
  for (Eigen::Index t = 1; t < data.size(); ++t) {
    counts[{data.x1(t - 1), data.x2(t - 1), data.x1(t), data.x2(t)}] += 1.0;
  }
  transitions_.reserve(counts.size());
  for (const auto& [key, n] : counts) {
    const auto [p1, p2, c1, c2] = key;
    transitions_.push_back({p1, p2, c1, c2, n});
    max_prev1_ = std::max(max_prev1_, p1);
    max_prev2_ = std::max(max_prev2_, p2);
    max_cur1_ = std::max(max_cur1_, c1);
    max_cur2_ = std::max(max_cur2_, c2);
  }
  log_factorial_ = log_factorials(std::max(max_prev1_, max_prev2_));
}

LoglikResult ConditionalLikelihood::evaluate(const BinarModel& model) const {
  model.validate();
  const Eigen::MatrixXd joint =
      joint_pmf_grid(model.innovations, max_cur1_, max_cur2_);
  const Eigen::MatrixXd thin1 = thinning_table(model.alpha1, max_prev1_, log_factorial_);
  const Eigen::MatrixXd thin2 = thinning_table(model.alpha2, max_prev2_, log_factorial_);

  LoglikResult out;
  for (const Transition& tr : transitions_) {
    const double p = convolve(thin1, thin2, joint, tr.prev1, tr.prev2, tr.cur1, tr.cur2);
    if (p > 0.0 && std::isfinite(p)) {
      out.value += tr.count * std::log(p);
    } else {
      out.value += tr.count * kZeroCellLogProb;
      out.zero_cells += static_cast<std::int64_t>(tr.count);
    }
  }
  return out;
}

double ConditionalLikelihood::transition_probability(const BinarModel& model,
                                                     std::int64_t prev1, std::int64_t prev2,
                                                     std::int64_t cur1, std::int64_t cur2) {
  model.validate();
  const auto lf = log_factorials(std::max(prev1, prev2));
  const Eigen::MatrixXd joint = joint_pmf_grid(model.innovations, cur1, cur2);
  return convolve(thinning_table(model.alpha1, prev1, lf),
                  thinning_table(model.alpha2, prev2, lf), joint, prev1, prev2, cur1, cur2);
}

double conditional_loglik(const BinarModel& model, const SeriesPair& pair) {
  return ConditionalLikelihood(pair).evaluate(model).value;
}

}  // namespace binar
