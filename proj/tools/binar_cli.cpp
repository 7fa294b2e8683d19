// binar: simulate, fit and study bivariate INAR(1) count series with copula-linked innovations.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "binar/errors.hpp"
#include "binar/estimation.hpp"
#include "binar/io.hpp"
#include "binar/mc.hpp"
#include "binar/stats.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int fail(const std::string& kind, const std::string& message, int code) {
  std::string line = message;
  std::replace(line.begin(), line.end(), '\n', ' ');
  std::cerr << "binar-error: " << kind << ": " << line << '\n';
  return code;
}

std::uint64_t effective_seed(std::uint64_t flag_seed) {
  const char* env = std::getenv("BINAR_SEED");
  if (env == nullptr) return flag_seed;
  try {
    std::size_t pos = 0;
    const std::string s(env);
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("BINAR_SEED is not an unsigned integer: '") + env + "'");
  }
}

/// Writes to `path`, or to stdout when path is empty or "-".
void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) throw binar::DataError("cannot write '" + path + "'");
  out << content;
}

std::string with_newline(std::string s) {
  if (s.empty() || s.back() != '\n') s.push_back('\n');
  return s;
}

binar::FitReport fit_with_se(const binar::SeriesPair& data, const binar::FitFamilies& fam,
                             binar::Method method) {
  binar::FitReport r = binar::fit(data, fam, method);
  if (method != binar::Method::CLS) {
    try {
      r.se = binar::observed_info_se(r, data);
    } catch (const binar::NumericalError& e) {
      r.raw_flags.push_back(std::string("se: not reported: ") + e.what());
    }
  }
  return r;
}

struct SimulateArgs {
  std::string model;
  long long n = 0;
  long long burnin = binar::kDefaultBurnin;
  std::uint64_t seed = 1;
  std::string out;
};

int run_simulate(const SimulateArgs& a) {
  const binar::BinarModel model = binar::parse_model_json(binar::read_text_file(a.model));
  const binar::SeriesPair data = binar::simulate(model, a.n, a.burnin, effective_seed(a.seed));
  std::ostringstream os;
  binar::write_series_csv(data, os);
  emit(a.out, os.str());
  return kOk;
}

struct FitArgs {
  std::string data;
  std::string marginals = "pp";
  std::string copula = "fgm";
  std::string method = "twostep";
  std::string out;
  bool grid = false;
};

int run_fit(const FitArgs& a) {
  const binar::SeriesPair data = binar::read_series_csv_file(a.data);
  data.validate();
  if (data.size() < 3) throw binar::DataError("fitting needs at least 3 rows");
  const binar::Method method = binar::parse_method(a.method);

  if (!a.grid) {
    const binar::FitFamilies fam = binar::FitFamilies::parse(a.marginals, a.copula);
    try {
      emit(a.out, with_newline(binar::fit_report_to_json(fit_with_se(data, fam, method))));
    } catch (const binar::NumericalError& e) {
      if (!a.out.empty() && a.out != "-") {
        const nlohmann::json partial{{"status", "failed"},
                                     {"method", a.method},
                                     {"marginals", a.marginals},
                                     {"copula", a.copula},
                                     {"error", e.what()}};
        emit(a.out, partial.dump(2) + "\n");
      }
      throw;
    }
    return kOk;
  }

  if (method == binar::Method::CLS) throw UsageError("--grid ranks by AIC; use cml or twostep");
  struct Entry {
    nlohmann::json report;
    double aic;
  };
  std::vector<Entry> entries;
  for (const char* marg : {"pp", "nbp", "pnb", "nbnb"}) {
    for (const char* cop : {"fgm", "frank", "clayton"}) {
      const binar::FitFamilies fam = binar::FitFamilies::parse(marg, cop);
      try {
        const binar::FitReport r = fit_with_se(data, fam, method);
        entries.push_back({nlohmann::json::parse(binar::fit_report_to_json(r)), *r.aic});
      } catch (const binar::NumericalError& e) {
        entries.push_back({{{"status", "failed"},
                            {"marginals", marg},
                            {"copula", cop},
                            {"error", e.what()}},
                           std::numeric_limits<double>::infinity()});
      }
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& x, const Entry& y) { return x.aic < y.aic; });
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    entries[i].report["rank"] = i + 1;
    entries[i].report["best"] = i == 0 && std::isfinite(entries[i].aic);
    out.push_back(entries[i].report);
  }
  emit(a.out, out.dump(2) + "\n");
  return kOk;
}

struct McArgs {
  std::string config;
  int workers = 1;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int run_mc_cmd(const McArgs& a) {
  binar::MCConfig cfg = binar::parse_mc_config_json(binar::read_text_file(a.config));
  if (a.seed) cfg.base_seed = *a.seed;
  if (std::getenv("BINAR_SEED") != nullptr) cfg.base_seed = effective_seed(cfg.base_seed);
  const binar::MCReport report = binar::run_mc(cfg, a.workers);

  std::filesystem::create_directories(a.out);
  const std::filesystem::path dir(a.out);
  std::ofstream csv(dir / "report.csv");
  std::ofstream json(dir / "report.json");
  std::ofstream reps(dir / "replicates.csv");
  if (!csv || !json || !reps) throw binar::DataError("cannot write into '" + a.out + "'");
  binar::write_report_csv(report, csv);
  binar::write_report_json(report, json);
  binar::write_replicates_csv(report, reps);
  if (report.unreliable) {
    std::cerr << "binar-warning: more than 5% of replicates failed; report marked unreliable\n";
  }
  return kOk;
}

int run_stats(const std::string& path) {
  const binar::SeriesPair data = binar::read_series_csv_file(path);
  data.validate();
  std::cout << std::setprecision(17) << "series,n,min,max,mean,variance\n";
  const binar::CountSeries* cols[] = {&data.x1, &data.x2};
  for (int j = 0; j < 2; ++j) {
    const binar::SummaryStats s = binar::summary_stats(*cols[j]);
    std::cout << "x" << j + 1 << ',' << cols[j]->size() << ',' << s.min << ',' << s.max << ','
              << s.mean << ',' << s.variance << '\n';
  }
  return kOk;
}

int run_acf(const std::string& path, int series, long long maxlag, const std::string& out) {
  const binar::SeriesPair data = binar::read_series_csv_file(path);
  data.validate();
  std::ostringstream os;
  binar::write_acf_csv(series == 1 ? data.x1 : data.x2, maxlag, os);
  emit(out, os.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bivariate INAR(1) count series with copula-linked innovations"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate a series pair from a model spec");
  simulate->add_option("--model", sim.model, "Model spec JSON")->required();
  simulate->add_option("--n", sim.n, "Retained observations")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--burnin", sim.burnin, "Discarded warm-up steps")->check(CLI::NonNegativeNumber);
  simulate->add_option("--seed", sim.seed, "Random seed (BINAR_SEED overrides)");
  simulate->add_option("--out", sim.out, "Output CSV (stdout if omitted)");

  FitArgs fa;
  auto* fitcmd = app.add_subcommand("fit", "Fit a model to a two-column count CSV");
  fitcmd->add_option("--data", fa.data, "Input CSV")->required();
  fitcmd->add_option("--marginals", fa.marginals, "Innovation marginals")
      ->check(CLI::IsMember({"pp", "nbp", "pnb", "nbnb"}));
  fitcmd->add_option("--copula", fa.copula, "Copula family")
      ->check(CLI::IsMember({"product", "fgm", "frank", "clayton"}));
  fitcmd->add_option("--method", fa.method, "Estimator")
      ->check(CLI::IsMember({"cls", "cml", "twostep"}));
  fitcmd->add_option("--out", fa.out, "Output JSON (stdout if omitted)");
  fitcmd->add_flag("--grid", fa.grid, "Fit all 12 marginal/copula combinations, ranked by AIC");

  McArgs ma;
  auto* mc = app.add_subcommand("mc", "Run a Monte Carlo study");
  mc->add_option("--config", ma.config, "MC config JSON")->required();
  mc->add_option("--workers", ma.workers, "Worker threads")->check(CLI::PositiveNumber);
  mc->add_option("--out", ma.out, "Output directory")->required();
  mc->add_option("--seed", ma.seed, "Override base_seed (BINAR_SEED overrides)");

  std::string stats_data;
  auto* stats = app.add_subcommand("stats", "Summary statistics per series");
  stats->add_option("--data", stats_data, "Input CSV")->required();

  std::string acf_data;
  std::string acf_out;
  int acf_series = 1;
  long long maxlag = 20;
  auto* acfcmd = app.add_subcommand("acf", "Sample ACF and PACF with +-1.96/sqrt(N) bands");
  acfcmd->add_option("--data", acf_data, "Input CSV")->required();
  acfcmd->add_option("--series", acf_series, "Column (1 or 2)")->check(CLI::Range(1, 2));
  acfcmd->add_option("--maxlag", maxlag, "Largest lag")->check(CLI::PositiveNumber);
  acfcmd->add_option("--out", acf_out, "Output CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), kUsage);
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*fitcmd) return run_fit(fa);
    if (*mc) return run_mc_cmd(ma);
    if (*stats) return run_stats(stats_data);
    if (*acfcmd) return run_acf(acf_data, acf_series, maxlag, acf_out);
  } catch (const UsageError& e) {
    return fail("usage", e.what(), kUsage);
  } catch (const binar::DataError& e) {
    return fail("data", e.what(), kData);
  } catch (const binar::NumericalError& e) {
    return fail("numerical", e.what(), kNumerical);
  } catch (const std::invalid_argument& e) {
    return fail("data", e.what(), kData);
  } catch (const std::exception& e) {
    return fail("data", e.what(), kData);
  }
  return kUsage;
}
