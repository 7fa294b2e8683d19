#include "binar/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "binar/errors.hpp"

namespace binar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kIndependenceBand = 1e-6;
constexpr double kLogitMin = -25.0;
constexpr double kLambdaMax = 1e6;
constexpr double kSigmaGapMax = 1e8;
constexpr double kPinTolerance = 1e-7;

double logit(double p) { return std::log(p) - std::log1p(-p); }
double inv_logit(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::string format_flag(const std::string& key, double raw, const std::string& what) {
  std::ostringstream os;
  os.precision(17);
  os << key << ": raw " << raw << ' ' << what;
  return os.str();
}

MarginalSpec make_marginal(MarginalKind kind, double lambda, std::optional<double> sigma2) {
  if (kind == MarginalKind::Poisson) return MarginalSpec::poisson(lambda);
  return MarginalSpec::negbin(lambda, *sigma2);
}

BinarModel make_model(const FitFamilies& fam, double a1, double a2, double l1, double l2,
                      double theta, std::optional<double> s1, std::optional<double> s2) {
  BinarModel m{a1, a2,
               InnovationModel{make_marginal(fam.marginal1, l1, s1),
                               make_marginal(fam.marginal2, l2, s2),
                               estimation_copula(fam.copula, theta)}};
  return m;
}

std::vector<double> theta_grid(CopulaFamily family) {
  switch (family) {
    case CopulaFamily::FGM: {
      std::vector<double> g;
      for (int i = -10; i <= 10; ++i) g.push_back(0.1 * i);
      return g;
    }
    case CopulaFamily::Frank:
      return {-20, -10, -5, -3, -2, -1.5, -1, -0.5, -0.25, 0,
              0.25, 0.5, 1, 1.5, 2, 3, 5, 10, 20};
    case CopulaFamily::Clayton:
      return {-0.9, -0.5, -0.25, 0, 0.25, 0.5, 1, 1.5, 2, 3, 5, 10, 20};
    case CopulaFamily::Product:
      break;
  }
  return {0.0};
}

double clamp_sigma2(double sigma2, double lambda) {
  const double floor = lambda + kSigmaGap;
  return std::isfinite(sigma2) ? std::max(sigma2, floor) : floor;
}

void flag_theta_bounds(const FitFamilies& fam, double theta, std::vector<std::string>& flags) {
  if (!fam.has_theta()) return;
  const Bounds b = theta_bounds(fam.copula);
  if (theta <= b.lower(0) + kPinTolerance) {
    flags.push_back(format_flag("theta", theta, "pinned at lower bound"));
  } else if (theta >= b.upper(0) - kPinTolerance) {
    flags.push_back(format_flag("theta", theta, "pinned at upper bound"));
  }
}

/// Packing of (theta, log(sigma2_j - lambda_j) for NegBin j) used by both the
/// CLS dependence search and the two-step likelihood search.
struct DependenceLayout {
  FitFamilies fam;
  double lambda1;
  double lambda2;

  Eigen::Index size() const { return (fam.has_theta() ? 1 : 0) + fam.negbin_count(); }

  Bounds bounds() const {
    Bounds b{Eigen::VectorXd(size()), Eigen::VectorXd(size())};
    Eigen::Index i = 0;
    if (fam.has_theta()) {
      const Bounds tb = theta_bounds(fam.copula);
      b.lower(i) = tb.lower(0);
      b.upper(i++) = tb.upper(0);
    }
    for (int j = 0; j < fam.negbin_count(); ++j) {
      b.lower(i) = std::log(kSigmaGap);
      b.upper(i++) = std::log(kSigmaGapMax);
    }
    return b;
  }

  Eigen::VectorXd pack(double theta, std::optional<double> s1, std::optional<double> s2) const {
    Eigen::VectorXd z(size());
    Eigen::Index i = 0;
    if (fam.has_theta()) z(i++) = theta;
    if (fam.marginal1 == MarginalKind::NegBin) z(i++) = std::log(*s1 - lambda1);
    if (fam.marginal2 == MarginalKind::NegBin) z(i++) = std::log(*s2 - lambda2);
    return bounds().project(z);
  }

  void unpack(const Eigen::VectorXd& z, double& theta, std::optional<double>& s1,
              std::optional<double>& s2) const {
    Eigen::Index i = 0;
    theta = fam.has_theta() ? z(i++) : 0.0;
    s1.reset();
    s2.reset();
    if (fam.marginal1 == MarginalKind::NegBin) s1 = lambda1 + std::exp(z(i++));
    if (fam.marginal2 == MarginalKind::NegBin) s2 = lambda2 + std::exp(z(i++));
  }
};

/// Picks the best starting theta on a coarse grid for the objective `f`
/// (theta placed in coordinate 0 of z).
Eigen::VectorXd grid_start(const Objective& f, Eigen::VectorXd z, CopulaFamily family,
                           const Bounds& b) {
  double best = f(z);
  Eigen::VectorXd best_z = z;
  for (double t : theta_grid(family)) {
    z(0) = std::clamp(t, b.lower(0), b.upper(0));
    const double v = f(z);
    if (v < best) {
      best = v;
      best_z = z;
    }
  }
  return best_z;
}

Objective guarded(Objective f) {
  return [f = std::move(f)](const Eigen::VectorXd& z) {
    try {
      return f(z);
    } catch (const std::invalid_argument&) {
      return kInf;
    } catch (const NumericalError&) {
      return kInf;
    }
  };
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::CLS: return "cls";
    case Method::CML: return "cml";
    case Method::TwoStep: return "twostep";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "cls") return Method::CLS;
  if (name == "cml") return Method::CML;
  if (name == "twostep") return Method::TwoStep;
  throw std::invalid_argument("unknown method '" + name + "'");
}

FitFamilies FitFamilies::parse(const std::string& marginals, const std::string& copula) {
  FitFamilies f;
  if (marginals == "pp") {
    f.marginal1 = f.marginal2 = MarginalKind::Poisson;
  } else if (marginals == "nbp") {
    f.marginal1 = MarginalKind::NegBin;
    f.marginal2 = MarginalKind::Poisson;
  } else if (marginals == "pnb") {
    f.marginal1 = MarginalKind::Poisson;
    f.marginal2 = MarginalKind::NegBin;
  } else if (marginals == "nbnb") {
    f.marginal1 = f.marginal2 = MarginalKind::NegBin;
  } else {
    throw std::invalid_argument("unknown marginals code '" + marginals + "'");
  }
  f.copula = parse_copula_family(copula);
  return f;
}

std::string FitFamilies::marginals_code() const {
  const auto code = [](MarginalKind k) { return k == MarginalKind::Poisson ? "p" : "nb"; };
  return std::string(code(marginal1)) + code(marginal2);
}

int FitFamilies::negbin_count() const {
  return (marginal1 == MarginalKind::NegBin ? 1 : 0) + (marginal2 == MarginalKind::NegBin ? 1 : 0);
}

Bounds theta_bounds(CopulaFamily family) {
  const auto box = [](double lo, double hi) {
    return Bounds{Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi)};
  };
  switch (family) {
    case CopulaFamily::FGM: return box(-1.0, 1.0);
    case CopulaFamily::Frank: return box(-50.0, 50.0);
    case CopulaFamily::Clayton: return box(-1.0, 50.0);
    case CopulaFamily::Product: break;
  }
  return box(0.0, 0.0);
}

CopulaSpec estimation_copula(CopulaFamily family, double theta) {
  switch (family) {
    case CopulaFamily::Product: return CopulaSpec::product();
    case CopulaFamily::FGM: return CopulaSpec::fgm(theta);
    case CopulaFamily::Frank:
      if (std::abs(theta) < kIndependenceBand) return CopulaSpec::product();
      return CopulaSpec::frank(theta);
    case CopulaFamily::Clayton:
      if (std::abs(theta) < kIndependenceBand) return CopulaSpec::product();
      return CopulaSpec::clayton(theta);
  }
  return CopulaSpec::product();
}

// ---------------------------------------------------------------------------
// Conditional least squares

ClsMarginalFit cls_marginal(const CountSeries& x, MarginalKind kind) {
  const Eigen::Index n = x.size();
  if (n < 3) throw std::invalid_argument("CLS requires at least 3 observations");
  const Eigen::VectorXd xd = x.cast<double>();
  const auto cur = xd.tail(n - 1);
  const auto lag = xd.head(n - 1);
  const double m1 = cur.mean();
  const double m0 = lag.mean();
  const double sxx = (lag.array() - m0).square().sum();
  if (!(sxx > 0.0)) {
    throw NumericalError("CLS: lagged series is constant (zero denominator)");
  }
  const double sxy = ((cur.array() - m1) * (lag.array() - m0)).sum();

  ClsMarginalFit fit;
  fit.alpha_raw = sxy / sxx;
  fit.lambda_raw = m1 - fit.alpha_raw * m0;
  fit.alpha = std::clamp(fit.alpha_raw, 0.0, kAlphaMax);
  fit.lambda = std::max(fit.lambda_raw, kLambdaMin);
  fit.alpha_clamped = fit.alpha != fit.alpha_raw;
  fit.lambda_clamped = fit.lambda != fit.lambda_raw;

  const Eigen::ArrayXd resid = cur.array() - fit.alpha_raw * lag.array() - fit.lambda_raw;
  fit.sigma2_moment = resid.square().mean() - fit.alpha * (1.0 - fit.alpha) * m0;

  const double nd = static_cast<double>(n);
  if (kind == MarginalKind::Poisson) {
    fit.cov = cls_asymptotic_cov_poisson(fit.alpha, fit.lambda) / nd;
  } else {
    const double s2 = clamp_sigma2(fit.sigma2_moment, fit.lambda);
    fit.cov = cls_asymptotic_cov_general(fit.alpha, MarginalSpec::negbin(fit.lambda, s2)) / nd;
  }
  return fit;
}

Eigen::VectorXd cls_residual_products(const SeriesPair& pair, const ClsMarginalFit& fit1,
                                      const ClsMarginalFit& fit2) {
  pair.validate();
  const Eigen::Index n = pair.size();
  const Eigen::ArrayXd x1 = pair.x1.cast<double>().array();
  const Eigen::ArrayXd x2 = pair.x2.cast<double>().array();
  const Eigen::ArrayXd r1 = x1.tail(n - 1) - fit1.alpha * x1.head(n - 1) - fit1.lambda;
  const Eigen::ArrayXd r2 = x2.tail(n - 1) - fit2.alpha * x2.head(n - 1) - fit2.lambda;
  return (r1 * r2).matrix();
}

DependenceFit cls_dependence(const SeriesPair& pair, const ClsMarginalFit& fit1,
                             const ClsMarginalFit& fit2, const FitFamilies& families,
                             const OptimizerSpec& opt) {
  const Eigen::VectorXd r = cls_residual_products(pair, fit1, fit2);
  const double count = static_cast<double>(r.size());
  const double rbar = r.mean();
  const double ss0 = (r.array() - rbar).square().sum();
  const DependenceLayout layout{families, fit1.lambda, fit2.lambda};

  std::optional<double> s1_init;
  std::optional<double> s2_init;
  if (families.marginal1 == MarginalKind::NegBin) {
    s1_init = clamp_sigma2(fit1.sigma2_moment, fit1.lambda);
  }
  if (families.marginal2 == MarginalKind::NegBin) {
    s2_init = clamp_sigma2(fit2.sigma2_moment, fit2.lambda);
  }

  // S = ss0 + (N-1)(rbar - gamma)^2. The search runs on sqrt(S - ss0), which
  // has the same minimizer and is not swamped by ss0 in the f_tol test.
  const auto gamma_at = [&](double theta, std::optional<double> s1, std::optional<double> s2) {
    const BinarModel m = make_model(families, 0.0, 0.0, fit1.lambda, fit2.lambda, theta, s1, s2);
    return innovation_covariance(m.innovations);
  };
  const auto excess = [&](const Eigen::VectorXd& z) {
    double theta = 0.0;
    std::optional<double> s1;
    std::optional<double> s2;
    layout.unpack(z, theta, s1, s2);
    return std::sqrt(count) * std::abs(rbar - gamma_at(theta, s1, s2));
  };

  DependenceFit out;
  out.sigma2_1 = s1_init;
  out.sigma2_2 = s2_init;
  if (!families.has_theta()) {
    // Under independence the criterion carries no information on the variances.
    const double e = std::sqrt(count) * std::abs(rbar - gamma_at(0.0, s1_init, s2_init));
    out.objective = ss0 + e * e;
    if (families.negbin_count() > 0) {
      out.flags.push_back("sigma2: moment estimate (not identified by CLS under product copula)");
    }
    return out;
  }

  // S is flat along theta * D(sigma2) = const, so the variances stay at their
  // moment estimates unless theta reaches a bound with S still reducible.
  const Bounds bounds = layout.bounds();
  const Eigen::VectorXd z0 = layout.pack(0.0, s1_init, s2_init);
  const Objective theta_only = guarded([&](const Eigen::VectorXd& t) {
    Eigen::VectorXd z = z0;
    z(0) = t(0);
    return excess(z);
  });
  const Bounds tb = theta_bounds(families.copula);
  MinimizeResult res;
  try {
    const Eigen::VectorXd t0 = grid_start(theta_only, Eigen::VectorXd::Zero(1), families.copula, tb);
    const MinimizeResult r1 = minimize(theta_only, tb, t0, opt);
    res.argmin = z0;
    res.argmin(0) = r1.argmin(0);
    res.value = r1.value;
    res.evals = r1.evals;
    const bool pinned = r1.argmin(0) <= tb.lower(0) + kPinTolerance ||
                        r1.argmin(0) >= tb.upper(0) - kPinTolerance;
    if (pinned && families.negbin_count() > 0 && r1.value > 0.0) {
      const MinimizeResult r2 = minimize(guarded(excess), bounds, res.argmin, opt);
      if (r2.value < res.value) res = r2;
    }
  } catch (const NonConvergence& e) {
    throw NonConvergence(std::string("CLS dependence search: ") + e.what(), e.best());
  }
  layout.unpack(res.argmin, out.theta, out.sigma2_1, out.sigma2_2);
  out.objective = ss0 + res.value * res.value;
  flag_theta_bounds(families, out.theta, out.flags);
  return out;
}

double cls_theta_fgm_closed_form(const SeriesPair& pair, const ClsMarginalFit& fit1,
                                 const ClsMarginalFit& fit2, std::int64_t M1,
                                 std::int64_t M2) {
  if (M1 < 1 || M2 < 1) throw std::invalid_argument("truncation bounds must be >= 1");
  const Eigen::VectorXd r = cls_residual_products(pair, fit1, fit2);
  // sum_k k (F_k (1 - F_k) - F_{k-1} (1 - F_{k-1})).
  const auto weight = [](const MarginalSpec& m, std::int64_t upper) {
    const MarginalTable t(m, upper);
    double acc = 0.0;
    for (std::int64_t k = 1; k <= upper; ++k) {
      const double f = t.cdf(k);
      const double g = t.cdf(k - 1);
      acc += static_cast<double>(k) * (f * (1.0 - f) - g * (1.0 - g));
    }
    return acc;
  };
  const double d1 = weight(MarginalSpec::poisson(fit1.lambda), M1);
  const double d2 = weight(MarginalSpec::poisson(fit2.lambda), M2);
  const double denom = static_cast<double>(r.size()) * d1 * d2;
  if (denom == 0.0 || !std::isfinite(denom)) {
    throw NumericalError("closed-form FGM estimate: zero denominator");
  }
  return r.sum() / denom;
}

// ---------------------------------------------------------------------------
// Reports

BinarModel FitReport::model() const {
  return make_model(families, alpha1, alpha2, lambda1, lambda2, theta, sigma2_1, sigma2_2);
}

std::vector<std::pair<std::string, double>> FitReport::estimates() const {
  std::vector<std::pair<std::string, double>> out{
      {"alpha1", alpha1}, {"alpha2", alpha2}, {"lambda1", lambda1}, {"lambda2", lambda2}};
  if (families.has_theta()) out.emplace_back("theta", theta);
  if (sigma2_1) out.emplace_back("sigma2_1", *sigma2_1);
  if (sigma2_2) out.emplace_back("sigma2_2", *sigma2_2);
  return out;
}

double aic(double loglik, int k) {
  if (k < 0) throw std::invalid_argument("AIC parameter count must be >= 0");
  return 2.0 * static_cast<double>(k) - 2.0 * loglik;
}

namespace {

void add_marginal_flags(const ClsMarginalFit& f, const std::string& idx,
                        std::vector<std::string>& flags) {
  if (f.alpha_clamped) {
    flags.push_back(format_flag("alpha" + idx, f.alpha_raw, "clamped into [0, 1-1e-6]"));
  }
  if (f.lambda_clamped) {
    flags.push_back(format_flag("lambda" + idx, f.lambda_raw, "clamped to 1e-8"));
  }
}

struct ClsStage {
  ClsMarginalFit fit1;
  ClsMarginalFit fit2;
};

ClsStage cls_stage(const SeriesPair& pair, const FitFamilies& families) {
  pair.validate();
  if (pair.size() < 3) throw std::invalid_argument("fitting requires N >= 3");
  return {cls_marginal(pair.x1, families.marginal1), cls_marginal(pair.x2, families.marginal2)};
}

}  // namespace

FitReport cls_fit(const SeriesPair& pair, const FitFamilies& families, const OptimizerSpec& opt) {
  const ClsStage st = cls_stage(pair, families);
  FitReport rep;
  rep.method = Method::CLS;
  rep.families = families;
  rep.alpha1 = st.fit1.alpha;
  rep.alpha2 = st.fit2.alpha;
  rep.lambda1 = st.fit1.lambda;
  rep.lambda2 = st.fit2.lambda;
  add_marginal_flags(st.fit1, "1", rep.raw_flags);
  add_marginal_flags(st.fit2, "2", rep.raw_flags);
  rep.se["alpha1"] = std::sqrt(st.fit1.cov(0, 0));
  rep.se["lambda1"] = std::sqrt(st.fit1.cov(1, 1));
  rep.se["alpha2"] = std::sqrt(st.fit2.cov(0, 0));
  rep.se["lambda2"] = std::sqrt(st.fit2.cov(1, 1));

  const DependenceFit dep = cls_dependence(pair, st.fit1, st.fit2, families, opt);
  rep.theta = dep.theta;
  rep.sigma2_1 = dep.sigma2_1;
  rep.sigma2_2 = dep.sigma2_2;
  rep.raw_flags.insert(rep.raw_flags.end(), dep.flags.begin(), dep.flags.end());
  rep.n_params = 4 + (families.has_theta() ? 1 : 0) + families.negbin_count();
  return rep;
}

// ---------------------------------------------------------------------------
// Likelihood-based fits

FitReport cml_fit(const SeriesPair& pair, const FitFamilies& families,
                  const std::optional<FitReport>& init, const OptimizerSpec& opt) {
  pair.validate();
  const FitReport start = init ? *init : cls_fit(pair, families, opt);
  const ConditionalLikelihood loglik(pair);

  const bool has_theta = families.has_theta();
  const bool nb1 = families.marginal1 == MarginalKind::NegBin;
  const bool nb2 = families.marginal2 == MarginalKind::NegBin;
  const Eigen::Index dim = 4 + (has_theta ? 1 : 0) + families.negbin_count();

  Bounds bounds{Eigen::VectorXd(dim), Eigen::VectorXd(dim)};
  bounds.lower.head(2).setConstant(kLogitMin);
  bounds.upper.head(2).setConstant(logit(kAlphaMax));
  bounds.lower.segment(2, 2).setConstant(std::log(kLambdaMin));
  bounds.upper.segment(2, 2).setConstant(std::log(kLambdaMax));
  Eigen::Index idx = 4;
  if (has_theta) {
    const Bounds tb = theta_bounds(families.copula);
    bounds.lower(idx) = tb.lower(0);
    bounds.upper(idx++) = tb.upper(0);
  }
  for (int j = 0; j < families.negbin_count(); ++j) {
    bounds.lower(idx) = std::log(kSigmaGap);
    bounds.upper(idx++) = std::log(kSigmaGapMax);
  }

  const auto unpack = [&](const Eigen::VectorXd& z) {
    const double a1 = inv_logit(z(0));
    const double a2 = inv_logit(z(1));
    const double l1 = std::exp(z(2));
    const double l2 = std::exp(z(3));
    Eigen::Index i = 4;
    const double theta = has_theta ? z(i++) : 0.0;
    std::optional<double> s1;
    std::optional<double> s2;
    if (nb1) s1 = l1 + std::exp(z(i++));
    if (nb2) s2 = l2 + std::exp(z(i++));
    return make_model(families, std::min(a1, kAlphaMax), std::min(a2, kAlphaMax), l1, l2,
                      theta, s1, s2);
  };

  Eigen::VectorXd z0(dim);
  const auto safe_logit = [](double a) { return logit(std::clamp(a, 1e-11, kAlphaMax)); };
  z0(0) = safe_logit(start.alpha1);
  z0(1) = safe_logit(start.alpha2);
  z0(2) = std::log(std::max(start.lambda1, kLambdaMin));
  z0(3) = std::log(std::max(start.lambda2, kLambdaMin));
  idx = 4;
  if (has_theta) z0(idx++) = start.theta;
  if (nb1) {
    z0(idx++) = std::log(clamp_sigma2(start.sigma2_1.value_or(kInf), start.lambda1) -
                         start.lambda1);
  }
  if (nb2) {
    z0(idx++) = std::log(clamp_sigma2(start.sigma2_2.value_or(kInf), start.lambda2) -
                         start.lambda2);
  }
  z0 = bounds.project(z0);

  const Objective f = guarded([&](const Eigen::VectorXd& z) { return -loglik(unpack(z)); });
  if (!std::isfinite(f(z0))) {
    throw NumericalError("CML: log-likelihood is not finite at the starting values");
  }
  MinimizeResult res;
  try {
    res = minimize(f, bounds, z0, opt);
  } catch (const NonConvergence& e) {
    throw NonConvergence(std::string("CML: ") + e.what(), e.best());
  }

  const BinarModel best = unpack(res.argmin);
  FitReport rep;
  rep.method = Method::CML;
  rep.families = families;
  rep.alpha1 = best.alpha1;
  rep.alpha2 = best.alpha2;
  rep.lambda1 = best.innovations.marginal1.lambda();
  rep.lambda2 = best.innovations.marginal2.lambda();
  rep.theta = has_theta ? res.argmin(4) : 0.0;
  if (nb1) rep.sigma2_1 = best.innovations.marginal1.variance();
  if (nb2) rep.sigma2_2 = best.innovations.marginal2.variance();
  const LoglikResult ll = loglik.evaluate(rep.model());
  rep.loglik = ll.value;
  rep.n_params = static_cast<int>(dim);
  rep.aic = aic(ll.value, rep.n_params);
  rep.evals = res.evals;
  if (ll.zero_cells > 0) {
    rep.raw_flags.push_back("loglik: " + std::to_string(ll.zero_cells) +
                            " zero-probability transitions charged log(1e-300)");
  }
  if (res.argmin(0) <= kLogitMin + kPinTolerance || rep.alpha1 >= kAlphaMax - 1e-12) {
    rep.raw_flags.push_back(format_flag("alpha1", rep.alpha1, "at box boundary"));
  }
  if (res.argmin(1) <= kLogitMin + kPinTolerance || rep.alpha2 >= kAlphaMax - 1e-12) {
    rep.raw_flags.push_back(format_flag("alpha2", rep.alpha2, "at box boundary"));
  }
  flag_theta_bounds(families, rep.theta, rep.raw_flags);
  return rep;
}

FitReport twostep_fit(const SeriesPair& pair, const FitFamilies& families,
                      const OptimizerSpec& opt) {
  const ClsStage st = cls_stage(pair, families);
  const ConditionalLikelihood loglik(pair);
  const DependenceLayout layout{families, st.fit1.lambda, st.fit2.lambda};

  FitReport rep;
  rep.method = Method::TwoStep;
  rep.families = families;
  rep.alpha1 = st.fit1.alpha;
  rep.alpha2 = st.fit2.alpha;
  rep.lambda1 = st.fit1.lambda;
  rep.lambda2 = st.fit2.lambda;
  add_marginal_flags(st.fit1, "1", rep.raw_flags);
  add_marginal_flags(st.fit2, "2", rep.raw_flags);

  std::optional<double> s1;
  std::optional<double> s2;
  if (families.marginal1 == MarginalKind::NegBin) {
    s1 = clamp_sigma2(st.fit1.sigma2_moment, st.fit1.lambda);
  }
  if (families.marginal2 == MarginalKind::NegBin) {
    s2 = clamp_sigma2(st.fit2.sigma2_moment, st.fit2.lambda);
  }

  const auto model_at = [&](const Eigen::VectorXd& z) {
    double theta = 0.0;
    std::optional<double> v1;
    std::optional<double> v2;
    layout.unpack(z, theta, v1, v2);
    return make_model(families, rep.alpha1, rep.alpha2, rep.lambda1, rep.lambda2, theta, v1, v2);
  };

  rep.n_params = static_cast<int>(layout.size());
  if (layout.size() == 0) {
    rep.theta = 0.0;
  } else {
    const Objective f = guarded([&](const Eigen::VectorXd& z) { return -loglik(model_at(z)); });
    const Bounds bounds = layout.bounds();
    Eigen::VectorXd z0 = layout.pack(0.0, s1, s2);
    if (families.has_theta()) z0 = grid_start(f, z0, families.copula, bounds);
    if (!std::isfinite(f(z0))) {
      throw NumericalError("two-step: log-likelihood is not finite at the starting values");
    }
    MinimizeResult res;
    try {
      res = minimize(f, bounds, z0, opt);
    } catch (const NonConvergence& e) {
      throw NonConvergence(std::string("two-step: ") + e.what(), e.best());
    }
    layout.unpack(res.argmin, rep.theta, rep.sigma2_1, rep.sigma2_2);
    rep.evals = res.evals;
  }
  if (!families.has_theta()) {
    rep.sigma2_1 = rep.sigma2_1 ? rep.sigma2_1 : s1;
    rep.sigma2_2 = rep.sigma2_2 ? rep.sigma2_2 : s2;
  }
  const LoglikResult ll = loglik.evaluate(rep.model());
  rep.loglik = ll.value;
  rep.aic = aic(ll.value, rep.n_params);
  if (ll.zero_cells > 0) {
    rep.raw_flags.push_back("loglik: " + std::to_string(ll.zero_cells) +
                            " zero-probability transitions charged log(1e-300)");
  }
  flag_theta_bounds(families, rep.theta, rep.raw_flags);
  return rep;
}

FitReport fit(const SeriesPair& pair, const FitFamilies& families, Method method,
              const OptimizerSpec& opt) {
  switch (method) {
    case Method::CLS: return cls_fit(pair, families, opt);
    case Method::CML: return cml_fit(pair, families, std::nullopt, opt);
    case Method::TwoStep: return twostep_fit(pair, families, opt);
  }
  throw std::invalid_argument("unknown method");
}

// ---------------------------------------------------------------------------
// Observed information

Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd h(n);
  for (Eigen::Index i = 0; i < n; ++i) h(i) = std::max(1e-4 * std::abs(x(i)), 1e-5);
  const double f0 = f(x);
  Eigen::MatrixXd hess(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp(i) += h(i);
    xm(i) -= h(i);
    hess(i, i) = (f(xp) - 2.0 * f0 + f(xm)) / (h(i) * h(i));
    for (Eigen::Index j = 0; j < i; ++j) {
      Eigen::VectorXd pp = x, pm = x, mp = x, mm = x;
      pp(i) += h(i); pp(j) += h(j);
      pm(i) += h(i); pm(j) -= h(j);
      mp(i) -= h(i); mp(j) += h(j);
      mm(i) -= h(i); mm(j) -= h(j);
      hess(i, j) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h(i) * h(j));
      hess(j, i) = hess(i, j);
    }
  }
  return hess;
}

Eigen::VectorXd observed_info_se(const Objective& loglik, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd info = -numerical_hessian(loglik, x);
  if (!info.allFinite()) throw NumericalError("observed information is not finite");
  const Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(
        "negative Hessian is not positive definite (optimum is not interior)");
  }
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(x.size(), x.size()));
  return cov.diagonal().cwiseSqrt();
}

std::map<std::string, double> observed_info_se(const FitReport& fit, const SeriesPair& pair) {
  if (fit.method == Method::CLS) {
    throw std::invalid_argument("observed-information SEs require a CML or two-step fit");
  }
  const FitFamilies& fam = fit.families;
  if (fam.has_theta()) {
    const Bounds tb = theta_bounds(fam.copula);
    const bool domain_edge =
        (fam.copula == CopulaFamily::FGM && std::abs(fit.theta) >= 1.0 - kPinTolerance) ||
        (fam.copula == CopulaFamily::Clayton && fit.theta <= -1.0 + kPinTolerance);
    if (domain_edge || fit.theta <= tb.lower(0) + kPinTolerance ||
        fit.theta >= tb.upper(0) - kPinTolerance) {
      throw NumericalError("theta is at the boundary of its domain; no Hessian-based SE");
    }
  }

  std::vector<std::string> names;
  Eigen::VectorXd x;
  if (fit.method == Method::CML) {
    for (const auto& [name, value] : fit.estimates()) names.push_back(name);
  } else {
    if (fam.has_theta()) names.push_back("theta");
    if (fit.sigma2_1) names.push_back("sigma2_1");
    if (fit.sigma2_2) names.push_back("sigma2_2");
  }
  if (names.empty()) return {};
  const auto all = fit.estimates();
  x.resize(static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < names.size(); ++i) {
    for (const auto& [name, value] : all) {
      if (name == names[i]) x(static_cast<Eigen::Index>(i)) = value;
    }
  }

  const ConditionalLikelihood loglik(pair);
  const auto objective = [&](const Eigen::VectorXd& v) {
    FitReport probe = fit;
    for (std::size_t i = 0; i < names.size(); ++i) {
      const double value = v(static_cast<Eigen::Index>(i));
      const std::string& n = names[i];
      if (n == "alpha1") probe.alpha1 = value;
      else if (n == "alpha2") probe.alpha2 = value;
      else if (n == "lambda1") probe.lambda1 = value;
      else if (n == "lambda2") probe.lambda2 = value;
      else if (n == "theta") probe.theta = value;
      else if (n == "sigma2_1") probe.sigma2_1 = value;
      else if (n == "sigma2_2") probe.sigma2_2 = value;
    }
    try {
      return loglik(probe.model());
    } catch (const std::exception&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  const Eigen::VectorXd se = observed_info_se(objective, x);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < names.size(); ++i) out[names[i]] = se(static_cast<Eigen::Index>(i));
  return out;
}

}  // namespace binar
