#include "cli.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace tuneinf;
using namespace tuneinf::testing;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("tuneinf_cli_") + info->name());
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "tuneinf");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    err_.str("");
    return cli::run_cli(static_cast<int>(argv.size()), argv.data(), err_);
  }

  std::string out() const { return dir_.string(); }
  json load(const std::string& file) const { return read_json(dir_ / file); }

  std::size_t lines(const std::string& file) const {
    std::ifstream in(dir_ / file);
    std::size_t k = 0;
    for (std::string s; std::getline(in, s);) ++k;
    return k;
  }

  fs::path dir_;
  std::ostringstream err_;
};

const std::string kDemo = data_path("ridge_demo.csv");

}  // namespace

TEST_F(CliTest, TuneMatchesLibrary) {
  ASSERT_EQ(run({"tune", "--input", kDemo, "--output", out(), "--criterion", "cv", "--grid-size", "20"}), 0);
  const FitResult f = fit_from_json(load("fit.json"));

  const CsvTable t = read_csv(kDemo);
  const RegressionLayout l = RegressionLayout::leading_response(2);
  const ModelSpec m = complete(ridge_linear_model(l, Box::interval(0.0, 1.0), 3));
  const LossSpec s = complete(squared_error_loss(l));
  const FitResult g = tune(m, s, Dataset(t.values, ColumnRoles{0, {1, 2}}), CriterionKind::CV_EXACT,
                           Box::interval(0.0, 1.0), 20, 1);
  EXPECT_NEAR(f.lambda_hat[0], g.lambda_hat[0], 1e-14);
  EXPECT_LT((f.theta_hat - g.theta_hat).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(f.criterion, CriterionKind::CV_EXACT);
  EXPECT_EQ(lines("trace.csv"), g.trace.size() + 1);
}

TEST_F(CliTest, VarianceReusesFit) {
  ASSERT_EQ(run({"tune", "--input", kDemo, "--output", out(), "--criterion", "cv_fast", "--grid-size", "20"}), 0);
  const std::string fit = (dir_ / "fit.json").string();
  const fs::path second = dir_ / "v";
  ASSERT_EQ(run({"variance", "--input", kDemo, "--output", second.string(), "--fit", fit}), 0);
  EXPECT_FALSE(fs::exists(second / "fit.json"));
  const json v = read_json(second / "variance.json");
  EXPECT_EQ(v["V2"].size(), 3u);
  EXPECT_EQ(v["lambda_hat"], load("fit.json")["lambda_hat"]);
  const Mat V2 = mat_from_json(v["V2"]);
  EXPECT_LE(sym_defect(V2), 1e-12);
  const std::string sel = v["selected"].get<std::string>();
  const Mat chosen = mat_from_json(v[sel]);
  const Vec se = vec_from_json(v["standard_errors"]);
  const double n = 150.0;
  for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(se[j], std::sqrt(chosen(j, j) / n), 1e-12 * std::max(1.0, se[j]));
}

TEST_F(CliTest, FitOutsideBoxIsInvalidInput) {
  EXPECT_EQ(run({"fit", "--input", kDemo, "--output", out(), "--lambda", "2"}), 2);
  const json e = load("error.json");
  EXPECT_EQ(e["error"]["code"], "InvalidInput");
  EXPECT_NE(err_.str().find("lambda box"), std::string::npos);
}

TEST_F(CliTest, FitAtFixedLambda) {
  ASSERT_EQ(run({"fit", "--input", kDemo, "--output", out(), "--lambda", "0.3"}), 0);
  const FitResult f = fit_from_json(load("fit.json"));
  EXPECT_DOUBLE_EQ(f.lambda_hat[0], 0.3);
  EXPECT_EQ(f.boundary_status[0], BoundaryStatus::INTERIOR);
}

TEST_F(CliTest, ConfigFileAndOverrides) {
  fs::create_directories(dir_);
  const fs::path cfg = dir_ / "c.json";
  write_json(cfg, json{{"input", kDemo}, {"lambda", 0.25}, {"output", (dir_ / "a").string()}});
  ASSERT_EQ(run({"fit", "--config", cfg.string()}), 0);
  EXPECT_DOUBLE_EQ(fit_from_json(read_json(dir_ / "a" / "fit.json")).lambda_hat[0], 0.25);

  ASSERT_EQ(run({"fit", "--config", cfg.string(), "--lambda", "0.5"}), 0);
  EXPECT_DOUBLE_EQ(fit_from_json(read_json(dir_ / "a" / "fit.json")).lambda_hat[0], 0.5);

  write_json(cfg, json{{"input", kDemo}, {"lamda", 0.25}});
  EXPECT_EQ(run({"fit", "--config", cfg.string(), "--output", out()}), 2);
  EXPECT_NE(err_.str().find("lamda"), std::string::npos);
}

TEST_F(CliTest, RejectsBadArguments) {
  EXPECT_EQ(run({"tune", "--input", kDemo, "--output", out(), "--grid-size", "3"}), 2);
  EXPECT_EQ(run({"tune", "--input", kDemo, "--output", out(), "--criterion", "magic"}), 2);
  EXPECT_EQ(run({"tune", "--input", kDemo, "--output", out(), "--model", "forest"}), 2);
  EXPECT_EQ(run({"tune", "--output", out()}), 2);
  EXPECT_EQ(run({"tune", "--no-such-flag"}), 2);
  EXPECT_EQ(run({"tune", "--input", kDemo, "--output", out(), "--response", "zz"}), 2);
}

TEST_F(CliTest, SimulateWritesTables) {
  ASSERT_EQ(run({"simulate", "--output", out(), "--dgp", "LINEAR_GAUSSIAN", "-n", "60", "-B", "4", "--criterion",
                 "cv_fast", "--grid-size", "10", "--curvature", "0.5"}),
            0);
  const json s = load("summary.json");
  ASSERT_EQ(s["runs"].size(), 1u);
  EXPECT_EQ(s["runs"][0]["curvature"], 0.5);
  EXPECT_EQ(lines("draws.csv"), 1 + 4 - s["runs"][0]["failures"].get<std::size_t>());
  // upper triangle of a 3 x 3 matrix
  EXPECT_EQ(lines("error_vs_C.csv"), 1u + 6u);
}

TEST_F(CliTest, BootstrapHistogram) {
  ASSERT_EQ(run({"bootstrap", "--input", kDemo, "--output", out(), "-B", "5", "--criterion", "cv_fast",
                 "--grid-size", "10", "--bins", "4"}),
            0);
  EXPECT_EQ(lines("histogram.csv"), 1u + 3u * 4u);
  EXPECT_EQ(load("summary.json")["B"], 5);
}

TEST_F(CliTest, StoneCheckGrid) {
  ASSERT_EQ(run({"stone-check", "--output", out(), "--dgp", "LINEAR_GAUSSIAN", "-B", "3", "--n-grid", "40", "80",
                 "--lambda", "0.1"}),
            0);
  EXPECT_EQ(load("stone.json")["results"].size(), 2u);
  EXPECT_EQ(lines("stone.csv"), 1u + 6u);
}

TEST(CliProcess, ExitCodes) {
  const std::string exe = TUNEINF_CLI;
  EXPECT_EQ(std::system((exe + " --help > /dev/null").c_str()), 0);
  const int rc = std::system((exe + " tune --output /nonexistent-dir/x 2> /dev/null").c_str());
  ASSERT_TRUE(WIFEXITED(rc));
  EXPECT_EQ(WEXITSTATUS(rc), 2);
}
