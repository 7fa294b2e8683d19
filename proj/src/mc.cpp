#include "binar/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <optional>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "binar/random.hpp"

namespace binar {

namespace {

constexpr double kUnreliableRate = 0.05;

struct ReplicateOutcome {
  std::vector<std::optional<NamedEstimates>> per_method;
};

std::vector<MCEstimator> standard_estimators(const MCConfig& cfg) {
  std::vector<MCEstimator> out;
  for (Method m : cfg.methods) {
    out.push_back({to_string(m), [m, fam = cfg.fit_families, opt = cfg.opt](const SeriesPair& p) {
                     return fit(p, fam, m, opt).estimates();
                   }});
  }
  return out;
}

}  // namespace

void MCConfig::validate() const {
  model.validate();
  if (reps < 2) throw std::invalid_argument("MC config: reps must be >= 2");
  if (n < 3) throw std::invalid_argument("MC config: n must be >= 3");
  if (burnin < 0) throw std::invalid_argument("MC config: burnin must be >= 0");
}

const MCCell& MCReport::cell(const std::string& method, const std::string& parameter) const {
  for (const MCCell& c : cells) {
    if (c.method == method && c.parameter == parameter) return c;
  }
  throw std::out_of_range("no MC cell for " + method + "/" + parameter);
}

std::map<std::string, double> truth_values(const BinarModel& model, const FitFamilies& families) {
  const InnovationModel& in = model.innovations;
  std::map<std::string, double> t{{"alpha1", model.alpha1},
                                  {"alpha2", model.alpha2},
                                  {"lambda1", in.marginal1.lambda()},
                                  {"lambda2", in.marginal2.lambda()},
                                  {"theta", in.copula.theta}};
  if (families.marginal1 == MarginalKind::NegBin) t["sigma2_1"] = in.marginal1.variance();
  if (families.marginal2 == MarginalKind::NegBin) t["sigma2_2"] = in.marginal2.variance();
  return t;
}

double bias_se(std::span<const double> estimates, double truth) {
  if (estimates.size() < 2) throw std::invalid_argument("bias_se needs at least 2 estimates");
  double mean = 0.0;
  for (double e : estimates) mean += e - truth;
  mean /= static_cast<double>(estimates.size());
  double ss = 0.0;
  for (double e : estimates) ss += (e - truth - mean) * (e - truth - mean);
  return std::sqrt(ss / static_cast<double>(estimates.size() - 1));
}

MCReport run_mc(const MCConfig& cfg, int workers) {
  return run_mc(cfg, standard_estimators(cfg), workers);
}

MCReport run_mc(const MCConfig& cfg, const std::vector<MCEstimator>& estimators, int workers) {
  cfg.validate();
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(cfg.reps));

  std::atomic<int> next{0};
  const auto work = [&] {
    for (int i = next++; i < cfg.reps; i = next++) {
      const SeriesPair data = simulate(cfg.model, cfg.n, cfg.burnin,
                                       derive_seed(cfg.base_seed, static_cast<std::uint64_t>(i)));
      ReplicateOutcome& out = outcomes[static_cast<std::size_t>(i)];
      out.per_method.resize(estimators.size());
      for (std::size_t m = 0; m < estimators.size(); ++m) {
        try {
          out.per_method[m] = estimators[m].estimate(data);
        } catch (const std::exception&) {
          out.per_method[m].reset();
        }
      }
    }
  };
  const int nthreads = std::min(workers, cfg.reps);
  if (nthreads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < nthreads; ++w) pool.emplace_back(work);
  }

  MCReport report;
  report.n = cfg.n;
  report.reps = cfg.reps;
  report.base_seed = cfg.base_seed;
  const auto truth = truth_values(cfg.model, cfg.fit_families);

  for (std::size_t m = 0; m < estimators.size(); ++m) {
    const std::string& method = estimators[m].method;
    int failed = 0;
    std::vector<MCCell> cells;
    for (int i = 0; i < cfg.reps; ++i) {
      const auto& est = outcomes[static_cast<std::size_t>(i)].per_method[m];
      if (!est) {
        ++failed;
        continue;
      }
      for (const auto& [name, value] : *est) {
        auto it = std::find_if(cells.begin(), cells.end(),
                               [&](const MCCell& c) { return c.parameter == name; });
        if (it == cells.end()) {
          MCCell c;
          c.method = method;
          c.parameter = name;
          const auto t = truth.find(name);
          c.truth = t == truth.end() ? std::nan("") : t->second;
          cells.push_back(std::move(c));
          it = std::prev(cells.end());
        }
        it->estimates.emplace_back(i, value);
      }
    }
    report.failures[method] = failed;
    if (failed > kUnreliableRate * cfg.reps) report.unreliable = true;
    for (MCCell& c : cells) {
      c.n_fail = failed;
      std::vector<double> values;
      values.reserve(c.estimates.size());
      for (const auto& [rep, v] : c.estimates) values.push_back(v);
      const double count = static_cast<double>(values.size());
      double sum = 0.0;
      double sq = 0.0;
      for (double v : values) {
        sum += v - c.truth;
        sq += (v - c.truth) * (v - c.truth);
      }
      c.bias = sum / count;
      c.mse = sq / count;
      c.bias_se = values.size() >= 2 ? bias_se(values, c.truth) : std::nan("");
      report.cells.push_back(std::move(c));
    }
  }
  return report;
}

void write_report_csv(const MCReport& report, std::ostream& os) {
  const auto flags = os.flags();
  os << std::setprecision(17);
  os << "method,parameter,mse,bias,bias_se,n_fail\n";
  for (const MCCell& c : report.cells) {
    os << c.method << ',' << c.parameter << ',' << c.mse << ',' << c.bias << ',' << c.bias_se
       << ',' << c.n_fail << '\n';
  }
  os.flags(flags);
}

void write_report_json(const MCReport& report, std::ostream& os) {
  nlohmann::json j;
  j["n"] = report.n;
  j["reps"] = report.reps;
  j["base_seed"] = report.base_seed;
  j["unreliable"] = report.unreliable;
  j["failures"] = report.failures;
  j["failure_policy"] = "failed replicates are excluded and counted";
  nlohmann::json cells = nlohmann::json::array();
  for (const MCCell& c : report.cells) {
    cells.push_back({{"method", c.method},
                     {"parameter", c.parameter},
                     {"truth", c.truth},
                     {"mse", c.mse},
                     {"bias", c.bias},
                     {"bias_se", c.bias_se},
                     {"n_fail", c.n_fail},
                     {"n_ok", c.estimates.size()}});
  }
  j["cells"] = std::move(cells);
  os << j.dump(2) << '\n';
}

void write_replicates_csv(const MCReport& report, std::ostream& os) {
  const auto flags = os.flags();
  os << std::setprecision(17);
  os << "rep,method,parameter,estimate\n";
  for (const MCCell& c : report.cells) {
    for (const auto& [rep, v] : c.estimates) {
      os << rep << ',' << c.method << ',' << c.parameter << ',' << v << '\n';
    }
  }
  os.flags(flags);
}

}  // namespace binar
