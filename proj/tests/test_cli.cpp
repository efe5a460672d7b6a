#include "cli.hpp"
#include "cogom/estimator.hpp"
#include "cogom/io.hpp"
#include "cogom/metrics.hpp"
#include "cogom/simulation.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <sstream>

namespace fs = std::filesystem;
using namespace cogom;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cogom_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

nlohmann::json load_json(const std::string& p) { return nlohmann::json::parse(io::read_text(p)); }

}  // namespace

TEST_F(CliTest, SimulateDefaultShapes) {
  const auto r = run_cli({"simulate", "--n", "200", "--k", "3", "--seed", "1", "--output", path("sim")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(io::read_matrix_csv(path("sim/R.csv")).rows(), 200);
  EXPECT_EQ(io::read_matrix_csv(path("sim/R.csv")).cols(), 20);
  EXPECT_EQ(io::read_matrix_csv(path("sim/X.csv")).cols(), 10);
  for (const char* f : {"truth_pi.csv", "truth_theta.csv", "truth_m.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "sim" / f)) << f;
  }
}

TEST_F(CliTest, SimulateIsByteIdenticalPerSeed) {
  ASSERT_EQ(run_cli({"simulate", "--n", "60", "--seed", "9", "-o", path("a")}).code, 0);
  ASSERT_EQ(run_cli({"simulate", "--n", "60", "--seed", "9", "-o", path("b")}).code, 0);
  for (const char* f : {"R.csv", "X.csv", "truth_pi.csv", "truth_theta.csv", "truth_m.csv"}) {
    EXPECT_EQ(io::read_text(path(std::string("a/") + f)), io::read_text(path(std::string("b/") + f)));
  }
}

TEST_F(CliTest, SimulateRejectsKOverN) {
  const auto r = run_cli({"simulate", "--n", "4", "--j", "4", "--k", "5", "-o", path("x")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("exceeds"), std::string::npos);
}

TEST_F(CliTest, FitNoiselessReportsTinyError) {
  ASSERT_EQ(run_cli({"simulate", "--n", "100", "--j", "30", "--w", "0", "--pure", "--noiseless",
                 "--seed", "2", "-o", path("sim")})
                .code,
            0);
  const auto r = run_cli({"fit", "-i", path("sim"), "--allow-fractional", "--hetero-iters", "200",
                      "--hetero-tol", "1e-12", "-o", path("fit")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("K=3"), std::string::npos);
  EXPECT_NE(r.out.find("pure_subjects=["), std::string::npos);
  const auto m = load_json(path("fit/manifest.json"));
  EXPECT_LT(m["metrics"]["mae_pi"].get<double>(), 1e-6);
  for (const char* f : {"pi.csv", "theta.csv", "m.csv", "eigenvalues.csv"}) {
    EXPECT_TRUE(fs::exists(dir_ / "fit" / f)) << f;
  }
}

TEST_F(CliTest, FitNeedsCovariatesForPositiveAlpha) {
  ASSERT_EQ(run_cli({"simulate", "--n", "40", "--seed", "2", "-o", path("sim")}).code, 0);
  fs::remove(dir_ / "sim" / "X.csv");
  const auto r = run_cli({"fit", "-i", path("sim"), "--alpha", "0.5", "-o", path("fit")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("covariates required for alpha > 0"), std::string::npos);
}

TEST_F(CliTest, FitValidatesInput) {
  fs::create_directories(dir_ / "bad");
  io::write_text(path("bad/R.csv"), "1,0\n0,x\n");
  auto r = run_cli({"fit", "-i", path("bad"), "--k", "1", "-o", path("fit")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("row 2, column 2"), std::string::npos) << r.err;

  io::write_text(path("bad/R.csv"), "1,0\n0,0.5\n1,1\n");
  r = run_cli({"fit", "-i", path("bad"), "--k", "1", "-o", path("fit")});
  EXPECT_EQ(r.code, 1);

  r = run_cli({"fit", "-i", path("missing"), "-o", path("fit")});
  EXPECT_EQ(r.code, 2);
  r = run_cli({"fit", "--bogus"});
  EXPECT_EQ(r.code, 1);
}

TEST_F(CliTest, FitNumericalFailureExitsThree) {
  fs::create_directories(dir_ / "flat");
  io::write_text(path("flat/R.csv"), "1,0,1\n1,0,1\n1,0,1\n1,0,1\n");
  const auto r = run_cli({"fit", "-i", path("flat"), "--k", "3", "-o", path("fit")});
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST_F(CliTest, FilePipelineEqualsInMemory) {
  ASSERT_EQ(run_cli({"simulate", "--n", "120", "--seed", "5", "-o", path("sim")}).code, 0);
  ASSERT_EQ(run_cli({"fit", "-i", path("sim"), "--alpha", "0.3", "-o", path("fit")}).code, 0);

  SimStudyConfig c;
  c.n = 120;
  c.j = 12;
  c.w = 6;
  c.seed = 5;
  const SimDataset d = generate(c);
  FitConfig f;
  f.k = 3;
  f.alpha = 0.3;
  const GomModel m = fit(d.r, d.x, f);
  EXPECT_EQ(io::read_matrix_csv(path("fit/pi.csv")), m.pi);
  EXPECT_EQ(io::read_matrix_csv(path("fit/theta.csv")), m.theta);
  EXPECT_EQ(io::read_matrix_csv(path("fit/m.csv")), m.m);
  const auto a = align({m.pi, m.theta, m.m}, {d.pi, d.theta, d.m});
  const auto manifest = load_json(path("fit/manifest.json"));
  EXPECT_EQ(manifest["metrics"]["mae_pi"].get<double>(), a.mae_pi);
  EXPECT_EQ(manifest["metrics"]["mae_m"].get<double>(), *a.mae_m);
}

TEST_F(CliTest, CvSingleAlphaAndDeterminism) {
  ASSERT_EQ(run_cli({"simulate", "--n", "80", "--seed", "3", "-o", path("sim")}).code, 0);
  auto r = run_cli({"cv", "-i", path("sim"), "--alpha-grid", "0.4", "-o", path("one")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rep = load_json(path("one/cv_report.json"));
  EXPECT_EQ(rep["selected_alpha"].get<double>(), 0.4);
  EXPECT_EQ(rep["folds"].get<int>(), 5);

  ASSERT_EQ(run_cli({"cv", "-i", path("sim"), "--seed", "4", "-o", path("a")}).code, 0);
  ASSERT_EQ(run_cli({"cv", "-i", path("sim"), "--seed", "4", "--threads", "2", "-o", path("b")}).code, 0);
  EXPECT_EQ(io::read_text(path("a/cv_report.json")), io::read_text(path("b/cv_report.json")));
  EXPECT_EQ(io::read_text(path("a/cv_curve.csv")), io::read_text(path("b/cv_curve.csv")));
  const std::string curve = io::read_text(path("a/cv_curve.csv"));
  EXPECT_EQ(curve.rfind("alpha,mean_mae,smoothed\n", 0), 0u);
  EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 22);
}

TEST_F(CliTest, ManifestReproducesRun) {
  ASSERT_EQ(run_cli({"simulate", "--n", "70", "--seed", "8", "--beta-het", "2", "-o", path("s1")}).code,
            0);
  auto args = load_json(path("s1/manifest.json"))["args"].get<std::vector<std::string>>();
  args.insert(args.begin(), "simulate");
  args.push_back("--output");
  args.push_back(path("s2"));
  ASSERT_EQ(run_cli(args).code, 0);
  EXPECT_EQ(io::read_text(path("s1/X.csv")), io::read_text(path("s2/X.csv")));

  ASSERT_EQ(run_cli({"cv", "-i", path("s1"), "--folds", "3", "--ipw", "-o", path("c1")}).code, 0);
  auto cv_args = load_json(path("c1/manifest.json"))["args"].get<std::vector<std::string>>();
  cv_args.insert(cv_args.begin(), "cv");
  cv_args.push_back("-o");
  cv_args.push_back(path("c2"));
  ASSERT_EQ(run_cli(cv_args).code, 0);
  EXPECT_EQ(io::read_text(path("c1/cv_report.json")), io::read_text(path("c2/cv_report.json")));
}

TEST_F(CliTest, BenchmarkCardinalityAndDeterminism) {
  io::write_text(path("spec.json"), R"({
    "designs": [{"name": "a", "n": 60, "j": 10, "w": 5, "k": 3},
                {"name": "b", "n": 80, "j": 10, "w": 5, "k": 3, "sigma": 1.0}],
    "methods": ["gom-svd", "stacked"],
    "seeds": [1, 2, 3],
    "metrics": ["mae_pi"]
  })");
  auto r = run_cli({"benchmark", "--config", path("spec.json"), "--threads", "2", "-o", path("b1")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = io::read_text(path("b1/results.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 13);
  EXPECT_EQ(csv.rfind("design,method,seed,metric,value,status\n", 0), 0u);
  ASSERT_EQ(run_cli({"benchmark", "-c", path("spec.json"), "-o", path("b2")}).code, 0);
  EXPECT_EQ(csv, io::read_text(path("b2/results.csv")));
  const auto summary = load_json(path("b1/summary.json"));
  EXPECT_EQ(summary["medians"].size(), 4u);
}

TEST_F(CliTest, BenchmarkRecordsFailuresPerRow) {
  io::write_text(path("spec.json"), R"({
    "designs": [{"name": "ok", "n": 60, "j": 10, "w": 5, "k": 3},
                {"name": "nocov", "n": 60, "j": 10, "w": 0, "k": 3}],
    "methods": ["cogom-alpha=0.5"],
    "seeds": [1],
    "metrics": ["mae_pi", "mae_m"]
  })");
  const auto r = run_cli({"benchmark", "-c", path("spec.json"), "-o", path("b")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = io::read_text(path("b/results.csv"));
  EXPECT_NE(csv.find("ok,cogom-alpha=0.5,1,mae_pi,"), std::string::npos);
  EXPECT_NE(csv.find("nocov,cogom-alpha=0.5,1,mae_m,nan,not-applicable"), std::string::npos) << csv;
}

TEST_F(CliTest, BenchmarkRejectsBadSpec) {
  io::write_text(path("spec.json"), R"({"designs": []})");
  EXPECT_EQ(run_cli({"benchmark", "-c", path("spec.json"), "-o", path("b")}).code, 1);
  io::write_text(path("spec.json"), R"({"designs": [{"n": 50}], "methods": ["magic"]})");
  EXPECT_EQ(run_cli({"benchmark", "-c", path("spec.json"), "-o", path("b")}).code, 1);
  io::write_text(path("spec.json"), "{not json");
  EXPECT_EQ(run_cli({"benchmark", "-c", path("spec.json"), "-o", path("b")}).code, 1);
  EXPECT_EQ(run_cli({"benchmark", "-c", path("nope.json"), "-o", path("b")}).code, 2);
}

TEST_F(CliTest, StackedTunedBeatsUnweightedAtHighNoise) {
  // N=500, J=50, W=25, K=3, sigma=2 with pure rows.
  io::write_text(path("spec.json"), R"({
    "designs": [{"name": "s2", "n": 500, "j": 50, "w": 25, "k": 3, "sigma": 2.0, "pure": true}],
    "methods": ["cogom", "stacked"],
    "replicates": 6,
    "base_seed": 40,
    "metrics": ["mae_pi"]
  })");
  ASSERT_EQ(run_cli({"benchmark", "-c", path("spec.json"), "-o", path("b")}).code, 0);
  const auto summary = load_json(path("b/summary.json"))["medians"];
  double tuned = 0, stacked = 0;
  for (const auto& row : summary) {
    if (row["method"] == "cogom") tuned = row["median"].get<double>();
    if (row["method"] == "stacked") stacked = row["median"].get<double>();
  }
  EXPECT_LE(tuned, stacked);
}
