#include "binar/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace binar {

bool Bounds::contains(const Eigen::VectorXd& x) const {
  return x.size() == lower.size() && (x.array() >= lower.array()).all() &&
         (x.array() <= upper.array()).all();
}

Eigen::VectorXd Bounds::project(const Eigen::VectorXd& x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

namespace {

class CountedObjective {
 public:
  CountedObjective(const Objective& f, int max_evals) : f_(f), max_evals_(max_evals) {}

  double operator()(const Eigen::VectorXd& x) {
    if (evals_ >= max_evals_) {
      throw NonConvergence("optimizer exceeded its evaluation budget", best());
    }
    ++evals_;
    double v = f_(x);
    if (std::isnan(v)) v = std::numeric_limits<double>::infinity();
    if (best_x_.size() == 0 || v < best_f_) {
      best_f_ = v;
      best_x_ = x;
    }
    return v;
  }

  MinimizeResult best() const { return {best_x_, best_f_, evals_}; }
  int evals() const { return evals_; }

 private:
  const Objective& f_;
  int max_evals_;
  int evals_ = 0;
  Eigen::VectorXd best_x_;
  double best_f_ = std::numeric_limits<double>::infinity();
};

Eigen::VectorXd initial_steps(const Eigen::VectorXd& x, const Bounds& b) {
  Eigen::VectorXd step(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double s = x(i) != 0.0 ? 0.1 * std::abs(x(i)) : 0.1;
    const double range = b.upper(i) - b.lower(i);
    if (std::isfinite(range)) s = std::min(s, 0.25 * range);
    s = std::max(s, 1e-6);
    step(i) = (x(i) + s <= b.upper(i)) ? s : -s;
  }
  return step;
}

struct Vertex {
  Eigen::VectorXd x;
  double f;
};

// One Nelder-Mead descent with adaptive coefficients (Gao and Han, 2012).
void descend(CountedObjective& f, const Bounds& b, const Eigen::VectorXd& start,
             double f_start, const OptimizerSpec& opt) {
  const Eigen::Index n = start.size();
  const double dn = static_cast<double>(n);
  // Coefficients reduce to the classic (1, 2, 0.5, 0.5) for n <= 2.
  const double dc = std::max(dn, 2.0);
  const double rho = 1.0;
  const double chi = 1.0 + 2.0 / dc;
  const double gamma = 0.75 - 1.0 / (2.0 * dc);
  const double sigma = 1.0 - 1.0 / dc;

  std::vector<Vertex> simplex;
  simplex.reserve(static_cast<std::size_t>(n) + 1);
  simplex.push_back({start, f_start});
  const Eigen::VectorXd step = initial_steps(start, b);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd x = start;
    x(i) += step(i);
    x = b.project(x);
    simplex.push_back({x, f(x)});
  }

  const auto by_value = [](const Vertex& a, const Vertex& c) { return a.f < c.f; };
  for (;;) {
    std::sort(simplex.begin(), simplex.end(), by_value);
    const Vertex& best = simplex.front();
    const Vertex& worst = simplex.back();
    double diameter = 0.0;
    for (const Vertex& v : simplex) {
      diameter = std::max(diameter, (v.x - best.x).lpNorm<Eigen::Infinity>());
    }
    const double spread = worst.f - best.f;
    if ((std::isfinite(spread) && spread <= opt.f_tol * std::abs(best.f)) ||
        diameter <= opt.x_tol) {
      return;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) centroid += simplex[static_cast<std::size_t>(i)].x;
    centroid /= dn;

    const auto along = [&](double t) {
      return Eigen::VectorXd(b.project(centroid + t * (centroid - worst.x)));
    };
    const double second_worst = simplex[static_cast<std::size_t>(n) - 1].f;

    const Eigen::VectorXd xr = along(rho);
    const double fr = f(xr);
    if (fr < best.f) {
      const Eigen::VectorXd xe = along(rho * chi);
      const double fe = f(xe);
      simplex.back() = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
      continue;
    }
    if (fr < second_worst) {
      simplex.back() = {xr, fr};
      continue;
    }
    // An outside contraction that projects onto the reflected point would
    // collapse the simplex against the boundary; contract inside instead.
    const Eigen::VectorXd xo = along(rho * gamma);
    if (fr < worst.f && xo != xr) {
      const double fc = f(xo);
      if (fc <= fr) {
        simplex.back() = {xo, fc};
        continue;
      }
    } else {
      const Eigen::VectorXd xc = along(-gamma);
      const double fc = f(xc);
      if (fc < worst.f) {
        simplex.back() = {xc, fc};
        continue;
      }
    }
    const Eigen::VectorXd anchor = simplex.front().x;
    for (std::size_t i = 1; i < simplex.size(); ++i) {
      simplex[i].x = b.project(anchor + sigma * (simplex[i].x - anchor));
      simplex[i].f = f(simplex[i].x);
    }
  }
}

}  // namespace

MinimizeResult minimize(const Objective& objective, const Bounds& bounds,
                        const Eigen::VectorXd& init, const OptimizerSpec& opt) {
  if (bounds.lower.size() != bounds.upper.size() || init.size() != bounds.size()) {
    throw std::invalid_argument("minimize: dimension mismatch between bounds and init");
  }
  if (init.size() == 0) throw std::invalid_argument("minimize: empty parameter vector");
  if ((bounds.lower.array() > bounds.upper.array()).any()) {
    throw std::invalid_argument("minimize: lower bound exceeds upper bound");
  }
  if (!bounds.contains(init)) throw std::invalid_argument("minimize: init outside bounds");

  CountedObjective f(objective, opt.max_evals);
  const double f0 = f(init);
  if (!std::isfinite(f0)) throw std::invalid_argument("minimize: objective not finite at init");

  double previous = f0;
  for (int round = 0; round <= opt.restarts; ++round) {
    const MinimizeResult current = f.best();
    descend(f, bounds, current.argmin, current.value, opt);
    const double now = f.best().value;
    if (round > 0 && previous - now <= opt.f_tol * std::abs(now)) break;
    previous = now;
  }
  return f.best();
}

}  // namespace binar
