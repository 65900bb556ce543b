//
// Copyright 2026 The dpgm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dpgm/bench.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "absl/strings/str_split.h"
#include "gtest/gtest.h"
#include "json.hpp"

namespace dpgm {
namespace {

ExperimentConfig Small() {
  ExperimentConfig cfg;
  cfg.n = 200;
  cfg.d = 3;
  cfg.sweep_R = {100, 1000};
  cfg.reps = 3;
  cfg.rho = 2.0;
  cfg.algorithms = {Algorithm::kDpgdBaseline, Algorithm::kLocDpgd,
                    Algorithm::kLocCuttingPlane};
  cfg.epsilon = 8.0;
  cfg.record_timing = false;
  cfg.seed = 17;
  return cfg;
}

TEST(SyntheticTest, ClusterAndOutliers) {
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const int n = 100, d = 10;
    Dataset data = *GenerateSynthetic(n, d, rng);
    ASSERT_EQ(data.n(), n);
    Vector mean = data.points().leftCols(90).rowwise().mean();
    EXPECT_NEAR(mean.norm(), 50.0, 0.05);
    const double bound = 0.01 * (std::sqrt(d) + 5 * std::sqrt(std::log(n)));
    for (int i = 0; i < 90; ++i) {
      EXPECT_LE((data.point(i) - mean).norm(), bound);
    }
    for (int i = 90; i < n; ++i) EXPECT_LE(data.point(i).norm(), 100.0);
    for (int i = 0; i < n; ++i) EXPECT_LE(data.point(i).norm(), 100.2);
  }
  Rng rng(0);
  EXPECT_FALSE(GenerateSynthetic(9, 2, rng).ok());
  Rng odd(1);
  Dataset small = *GenerateSynthetic(15, 2, odd);
  EXPECT_EQ(small.n(), 15);
}

TEST(AlgorithmNameTest, RoundTrip) {
  for (Algorithm a : {Algorithm::kDpgdBaseline, Algorithm::kLocDpgd,
                      Algorithm::kLocCuttingPlane, Algorithm::kSinvs}) {
    EXPECT_EQ(*ParseAlgorithm(AlgorithmName(a)), a);
  }
  EXPECT_FALSE(ParseAlgorithm("gd").ok());
}

TEST(ConfigTest, Validation) {
  ExperimentConfig cfg;
  EXPECT_TRUE(cfg.Validate().ok());
  cfg.reps = 0;
  EXPECT_FALSE(cfg.Validate().ok());
  cfg = {};
  cfg.r = 200;
  EXPECT_FALSE(cfg.Validate().ok());
  cfg = {};
  cfg.sweep_R = {};
  EXPECT_FALSE(cfg.Validate().ok());
  cfg = {};
  cfg.algorithms = {Algorithm::kSinvs};
  EXPECT_FALSE(cfg.Validate().ok());  // d = 10.
  cfg = {};
  cfg.epsilon.reset();
  EXPECT_FALSE(cfg.Validate().ok());
  cfg.rho = 0.5;
  EXPECT_TRUE(cfg.Validate().ok());
  cfg.algorithms = {Algorithm::kLocCuttingPlane};
  EXPECT_FALSE(cfg.Validate().ok());
}

TEST(BaselineTest, StepsMatchRateRelation) {
  const int n = 1000, d = 10;
  const double rho = 0.5;
  const int steps = BaselineDpgdSteps(n, d, rho);
  EXPECT_NEAR(std::sqrt(2.0 / steps), 16 * std::sqrt(d) / (n * std::sqrt(rho)), 1e-3);
  EXPECT_EQ(BaselineDpgdSteps(10, 10, 0.01), 1);
  ExperimentConfig cfg;
  EXPECT_NEAR(ExperimentRho(cfg), ZcdpFromApproxDp({1.0, 1e-6}).rho, 1e-15);
  cfg.rho = 0.3;
  EXPECT_DOUBLE_EQ(ExperimentRho(cfg), 0.3);
}

TEST(ExperimentTest, MinimalConfigHasOneRow) {
  ExperimentConfig cfg = Small();
  cfg.reps = 1;
  cfg.sweep_R = {100};
  cfg.algorithms = {Algorithm::kDpgdBaseline};
  RunReport report = *RunExperiment(cfg);
  ASSERT_EQ(report.rows.size(), 1u);
  ASSERT_EQ(report.aggregates.size(), 1u);
  EXPECT_EQ(report.aggregates[0].reps, 1);
}

TEST(ExperimentTest, InvariantsHold) {
  RunReport report = *RunExperiment(Small());
  ASSERT_EQ(report.rows.size(), 3u * 2u * 3u);
  for (const RunRow& row : report.rows) {
    EXPECT_GE(row.ratio, 1.0 - 1e-9);
    EXPECT_NEAR(row.ledger.Total(), row.budget_rho, 1e-12);
    EXPECT_GT(row.oracle_objective, 0.0);
  }
  EXPECT_EQ(report.aggregates.size(), 6u);
  for (const Aggregate& a : report.aggregates) {
    EXPECT_EQ(a.reps, 3);
    EXPECT_GE(a.median_ratio, 1.0 - 1e-9);
  }
}

TEST(ExperimentTest, DeterministicAcrossThreadCounts) {
  ExperimentConfig cfg = Small();
  cfg.threads = 1;
  const std::string a = ReportJson(*RunExperiment(cfg));
  cfg.threads = 3;
  const std::string b = ReportJson(*RunExperiment(cfg));
  EXPECT_EQ(a, b);
  cfg.seed = 18;
  EXPECT_NE(ReportJson(*RunExperiment(cfg)), a);
}

TEST(ExperimentTest, SinvsRows) {
  ExperimentConfig cfg;
  cfg.n = 20;
  cfg.d = 1;
  cfg.sweep_R = {100};
  cfg.r = 0.5;
  cfg.reps = 2;
  cfg.algorithms = {Algorithm::kSinvs};
  cfg.record_timing = false;
  RunReport report = *RunExperiment(cfg);
  ASSERT_EQ(report.rows.size(), 2u);
  for (const RunRow& row : report.rows) {
    EXPECT_TRUE(row.ledger.entries().empty());
    EXPECT_GE(row.ratio, 1.0 - 1e-9);
  }
}

TEST(ReportTest, EmptyReportIsHeaderOnly) {
  RunReport empty;
  EXPECT_EQ(ReportCsv(empty),
            "algorithm,R,rep,objective,oracle_objective,ratio,wall_ms,failed,seed\n");
}

TEST(ReportTest, CsvRoundTrips) {
  ExperimentConfig cfg = Small();
  cfg.reps = 1;
  RunReport report = *RunExperiment(cfg);
  const std::string csv = ReportCsv(report);
  ASSERT_EQ(csv.back(), '\n');
  std::vector<std::string> lines = absl::StrSplit(csv, '\n', absl::SkipEmpty());
  ASSERT_EQ(lines.size(), report.rows.size() + 1);
  for (size_t i = 0; i < report.rows.size(); ++i) {
    std::vector<std::string> f = absl::StrSplit(lines[i + 1], ',');
    ASSERT_EQ(f.size(), 9u);
    const RunRow& row = report.rows[i];
    EXPECT_EQ(*ParseAlgorithm(f[0]), row.algorithm);
    EXPECT_DOUBLE_EQ(std::stod(f[1]), row.R);
    EXPECT_EQ(std::stoi(f[2]), row.rep);
    EXPECT_NEAR(std::stod(f[3]), row.objective, 1e-11 * row.objective);
    EXPECT_NEAR(std::stod(f[4]), row.oracle_objective, 1e-11 * row.oracle_objective);
    EXPECT_NEAR(std::stod(f[5]), row.ratio, 1e-11 * row.ratio);
    EXPECT_EQ(std::stoi(f[7]), row.failed ? 1 : 0);
    EXPECT_EQ(std::stoull(f[8]), row.seed);
  }
}

TEST(ReportTest, JsonMirrorsRows) {
  ExperimentConfig cfg = Small();
  cfg.reps = 1;
  RunReport report = *RunExperiment(cfg);
  const std::string text = ReportJson(report);
  ASSERT_EQ(text.back(), '\n');
  nlohmann::json doc = nlohmann::json::parse(text);
  EXPECT_EQ(doc["library"], "dpgm");
  EXPECT_EQ(doc["version"], DPGM_VERSION);
  EXPECT_EQ(doc["config"]["n"], 200);
  ASSERT_EQ(doc["rows"].size(), report.rows.size());
  for (size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = doc["rows"][i];
    double total = 0.0;
    for (const auto& e : row["budget_trace"]) total += e["rho"].get<double>();
    EXPECT_NEAR(total, row["budget_rho"].get<double>(), 1e-11);
    EXPECT_NEAR(row["ratio"].get<double>(), report.rows[i].ratio,
                1e-11 * report.rows[i].ratio);
  }
  EXPECT_EQ(doc["aggregates"].size(), report.aggregates.size());
}

TEST(ReportTest, SchemaFileIsValidJson) {
  std::ifstream in(DPGM_SCHEMA_PATH);
  ASSERT_TRUE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();
  nlohmann::json schema = nlohmann::json::parse(buffer.str());
  EXPECT_EQ(schema["type"], "object");
}

TEST(ReportTest, EmitWritesAndReportsIoErrors) {
  ExperimentConfig cfg = Small();
  cfg.reps = 1;
  cfg.sweep_R = {100};
  cfg.algorithms = {Algorithm::kDpgdBaseline};
  RunReport report = *RunExperiment(cfg);
  const auto path = std::filesystem::temp_directory_path() / "dpgm_bench_test.csv";
  ASSERT_TRUE(EmitReport(report, ReportFormat::kCsv, path.string()).ok());
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  EXPECT_EQ(buffer.str(), ReportCsv(report));
  EXPECT_EQ(EmitReport(report, ReportFormat::kJson, "/nonexistent/dir/x.json").code(),
            absl::StatusCode::kUnavailable);
}

TEST(ConfigJsonTest, ParsesAndRejects) {
  auto cfg = ParseExperimentConfigJson(
      R"({"n": 50, "d": 2, "sweep_R": [10, 20], "r": 0.1, "eps": 2, "delta": null,
          "rho": 0.4, "beta": 0.1, "reps": 2, "algos": ["loc-dpgd"], "seed": 9,
          "format": "json", "out": "x.json"})");
  ASSERT_TRUE(cfg.ok()) << cfg.status();
  EXPECT_EQ(cfg->n, 50);
  EXPECT_EQ(cfg->sweep_R, (std::vector<double>{10, 20}));
  EXPECT_FALSE(cfg->delta.has_value());
  EXPECT_DOUBLE_EQ(*cfg->rho, 0.4);
  EXPECT_EQ(cfg->algorithms, (std::vector<Algorithm>{Algorithm::kLocDpgd}));
  EXPECT_EQ(cfg->format, ReportFormat::kJson);
  EXPECT_EQ(cfg->seed, 9u);
  EXPECT_FALSE(ParseExperimentConfigJson("[1]").ok());
  EXPECT_FALSE(ParseExperimentConfigJson("{").ok());
  EXPECT_FALSE(ParseExperimentConfigJson(R"({"bogus": 1})").ok());
  EXPECT_FALSE(ParseExperimentConfigJson(R"({"n": "many"})").ok());
  EXPECT_FALSE(ParseExperimentConfigJson(R"({"algos": ["gd"]})").ok());
}

TEST(ExperimentTest, LoadsDataFile) {
  const auto path = std::filesystem::temp_directory_path() / "dpgm_bench_data.csv";
  std::ofstream(path) << "0,0\n1,0\n0,1\n5,5\n1,1\n";
  ExperimentConfig cfg;
  cfg.data_path = path.string();
  cfg.sweep_R = {10};
  cfg.reps = 2;
  cfg.algorithms = {Algorithm::kDpgdBaseline};
  cfg.record_timing = false;
  RunReport report = *RunExperiment(cfg);
  ASSERT_EQ(report.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(report.rows[0].oracle_objective, report.rows[1].oracle_objective);
  cfg.data_path = "/nonexistent.csv";
  EXPECT_EQ(RunExperiment(cfg).status().code(), absl::StatusCode::kNotFound);
}

}  // namespace
}  // namespace dpgm
