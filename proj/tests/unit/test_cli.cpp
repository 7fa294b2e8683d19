#include <sys/wait.h>

#include <cmath>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "binar/estimation.hpp"
#include "binar/io.hpp"
#include "binar/likelihood.hpp"
#include "binar/stats.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace binar;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("binar_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  CliResult run(const std::string& args, const std::string& env = "") const {
    const std::string err = path("stderr.txt");
    const std::string cmd = env + " " + BINAR_CLI_PATH + " " + args + " 2>" + err;
    FILE* p = popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    std::size_t k;
    while ((k = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, k);
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out, slurp(err)};
  }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  std::string model_file(const std::string& copula, double theta, double alpha = 0.6) const {
    std::ostringstream m;
    m << R"({"alpha1": )" << alpha << R"(, "alpha2": )" << (alpha == 0 ? 0.0 : 0.4)
      << R"(, "marginal1": {"type": "poisson", "lambda": 1},
               "marginal2": {"type": "poisson", "lambda": 2},
               "copula": {"family": ")" << copula << R"(", "theta": )" << theta << "}}";
    write("model.json", m.str());
    return path("model.json");
  }

  static void expect_single_line_error(const CliResult& r, int code, const std::string& kind) {
    EXPECT_EQ(r.code, code) << r.err;
    EXPECT_EQ(r.err.rfind("binar-error: " + kind + ": ", 0), 0u) << r.err;
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << r.err;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SimulateZeroAlphaRows) {
  const auto r = run("simulate --model " + model_file("fgm", 0.3, 0.0) + " --n 10 --seed 3");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  const auto d = read_series_csv(in);
  EXPECT_EQ(d.size(), 10);
  EXPECT_EQ(r.out.substr(0, 6), "x1,x2\n");
}

TEST_F(Cli, SimulateIsByteIdenticalPerSeed) {
  const auto m = model_file("frank", -1);
  ASSERT_EQ(run("simulate --model " + m + " --n 300 --seed 5 --out " + path("a.csv")).code, 0);
  ASSERT_EQ(run("simulate --model " + m + " --n 300 --seed 5 --out " + path("b.csv")).code, 0);
  ASSERT_EQ(run("simulate --model " + m + " --n 300 --seed 6 --out " + path("c.csv")).code, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_NE(slurp(path("a.csv")), slurp(path("c.csv")));
}

TEST_F(Cli, SeedEnvironmentOverridesFlag) {
  const auto m = model_file("clayton", 1);
  const auto a = run("simulate --model " + m + " --n 50 --seed 1", "BINAR_SEED=77");
  const auto b = run("simulate --model " + m + " --n 50 --seed 77");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  expect_single_line_error(run("simulate --model " + m + " --n 5", "BINAR_SEED=abc"), 1, "usage");
}

TEST_F(Cli, ErrorPathsAreSingleLineWithExitCodes) {
  expect_single_line_error(run("simulate --n 5"), 1, "usage");
  expect_single_line_error(run("frobnicate"), 1, "usage");
  expect_single_line_error(run("fit --data x.csv --copula gumbel"), 1, "usage");
  write("bad_model.json", R"({"alpha1": 0.6, "alpha2": 0.4, "colour": 1})");
  expect_single_line_error(run("simulate --model " + path("bad_model.json") + " --n 5"), 2, "data");
  write("bad.csv", "x1,x2\n1,2\n3,-4\n");
  expect_single_line_error(run("stats --data " + path("bad.csv")), 2, "data");
  expect_single_line_error(run("fit --data " + path("missing.csv")), 2, "data");
  write("flat.csv", "1,1\n1,1\n1,1\n1,1\n");
  const auto r = run("fit --data " + path("flat.csv") + " --out " + path("flat.json"));
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(r.err.rfind("binar-error: ", 0), 0u);
}

TEST_F(Cli, FitReportReparsesAndProductLoglikFactorizes) {
  ASSERT_EQ(run("simulate --model " + model_file("product", 0) + " --n 400 --seed 9 --out " +
                path("d.csv")).code,
            0);
  const auto r = run("fit --data " + path("d.csv") + " --copula product --method twostep");
  ASSERT_EQ(r.code, 0) << r.err;
  const FitReport f = parse_fit_report_json(r.out);
  const auto d = read_series_csv_file(path("d.csv"));
  const auto c1 = cls_marginal(d.x1);
  const auto c2 = cls_marginal(d.x2);
  const BinarModel indep{c1.alpha, c2.alpha,
                         InnovationModel{MarginalSpec::poisson(c1.lambda), MarginalSpec::poisson(c2.lambda),
                                         CopulaSpec::product()}};
  ASSERT_TRUE(f.loglik.has_value());
  EXPECT_NEAR(*f.loglik, conditional_loglik(indep, d), 1e-9);
  EXPECT_EQ(f.n_params, 0);
}

TEST_F(Cli, FitRecoversTheta) {
  // bias_se of the two-step theta for this design is about 0.22 at N = 500.
  ASSERT_EQ(run("simulate --model " + model_file("fgm", -0.5) + " --n 500 --seed 10 --out " +
                path("d.csv")).code,
            0);
  const auto r = run("fit --data " + path("d.csv") + " --marginals pp --copula fgm --method cml");
  ASSERT_EQ(r.code, 0) << r.err;
  const FitReport f = parse_fit_report_json(r.out);
  EXPECT_NEAR(f.theta, -0.5, 3 * 0.22);
  EXPECT_NEAR(f.alpha1, 0.6, 3 * 0.03);
  EXPECT_TRUE(f.se.count("theta"));
}

TEST_F(Cli, GridRanksByAicAndFlagsBest) {
  const auto r = run("fit --grid --data " + std::string(BINAR_TEST_DATA_DIR) + "/loan_like.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j.size(), 12u);
  int best = 0;
  double prev = -INFINITY;
  for (std::size_t i = 0; i < j.size(); ++i) {
    EXPECT_EQ(j[i]["rank"], i + 1);
    if (j[i]["best"].get<bool>()) ++best;
    if (j[i].contains("aic")) {
      const double a = j[i]["aic"];
      EXPECT_GE(a, prev);
      prev = a;
    }
  }
  EXPECT_EQ(best, 1);
  EXPECT_TRUE(j[0]["best"].get<bool>());
  // Data come from negative binomial innovations, so a Poisson-only fit should not win.
  EXPECT_NE(j[0]["marginals"], "pp");
}

TEST_F(Cli, StatsAndAcfOutputs) {
  const std::string data = std::string(BINAR_TEST_DATA_DIR) + "/loan_like.csv";
  const auto s = run("stats --data " + data);
  ASSERT_EQ(s.code, 0);
  EXPECT_EQ(s.out.substr(0, s.out.find('\n')), "series,n,min,max,mean,variance");
  EXPECT_NE(s.out.find("x1,115,0,19,"), std::string::npos);
  const auto a = run("acf --data " + data + " --series 2 --maxlag 5 --out " + path("acf.csv"));
  ASSERT_EQ(a.code, 0);
  const auto csv = slurp(path("acf.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  expect_single_line_error(run("acf --data " + data + " --maxlag 60"), 2, "data");
}

TEST_F(Cli, McWorkersProduceIdenticalFiles) {
  std::ostringstream cfg;
  cfg << R"({"model": )" << slurp(model_file("fgm", -0.5))
      << R"(, "n": 120, "reps": 12, "base_seed": 2024, "methods": ["cls", "twostep"]})";
  write("mc.json", cfg.str());
  ASSERT_EQ(run("mc --config " + path("mc.json") + " --workers 1 --out " + path("w1")).code, 0);
  ASSERT_EQ(run("mc --config " + path("mc.json") + " --workers 8 --out " + path("w8")).code, 0);
  for (const char* f : {"report.csv", "report.json", "replicates.csv"}) {
    EXPECT_EQ(slurp(path("w1/") + f), slurp(path("w8/") + f)) << f;
  }
  const auto report = nlohmann::json::parse(slurp(path("w1/report.json")));
  EXPECT_FALSE(report["unreliable"].get<bool>());
  const auto reps = slurp(path("w1/replicates.csv"));
  EXPECT_EQ(reps.substr(0, reps.find('\n')), "rep,method,parameter,estimate");
}
