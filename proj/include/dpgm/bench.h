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

#ifndef DPGM_BENCH_H_
#define DPGM_BENCH_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpgm/geometry.h"
#include "dpgm/privacy.h"

namespace dpgm {

// 0.9 n points from N(mu, 0.01^2 I) with mu uniform on the radius-50 sphere,
// the remaining points uniform in B(0, 100). Cluster points come first.
absl::StatusOr<Dataset> GenerateSynthetic(int n, int d, Rng& rng);

enum class Algorithm { kDpgdBaseline, kLocDpgd, kLocCuttingPlane, kSinvs };

std::string AlgorithmName(Algorithm algorithm);
absl::StatusOr<Algorithm> ParseAlgorithm(const std::string& name);

enum class ReportFormat { kCsv, kJson };

struct ExperimentConfig {
  int n = 1000;
  int d = 10;
  std::vector<double> sweep_R = {1e2, 1e3, 1e4};
  double r = 0.05;
  std::optional<double> epsilon = 1.0;
  std::optional<double> delta = 1e-6;
  // When set, used directly by the zCDP algorithms instead of converting
  // (epsilon, delta).
  std::optional<double> rho;
  double beta = 0.05;
  int reps = 10;
  std::vector<Algorithm> algorithms = {Algorithm::kDpgdBaseline,
                                       Algorithm::kLocDpgd};
  uint64_t seed = 0;
  std::string output_path;
  ReportFormat format = ReportFormat::kCsv;
  // When false every wall_ms is reported as 0, making reports byte-stable.
  bool record_timing = true;
  // Worker threads for reps; 0 picks the hardware concurrency.
  int threads = 0;
  // Optional CSV dataset used for every rep instead of synthetic data.
  std::string data_path;

  absl::Status Validate() const;
};

struct RunRow {
  Algorithm algorithm;
  double R = 0.0;
  int rep = 0;
  double objective = 0.0;
  double oracle_objective = 0.0;
  double ratio = 0.0;
  double wall_ms = 0.0;
  bool failed = false;
  uint64_t seed = 0;
  // zCDP allocation ledger of the run; empty for the pure-DP sampler.
  BudgetLedger ledger;
  // The zCDP budget the ledger should sum to.
  double budget_rho = 0.0;
};

struct Aggregate {
  Algorithm algorithm;
  double R = 0.0;
  double mean_ratio = 0.0;
  double median_ratio = 0.0;
  int failures = 0;
  int reps = 0;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<RunRow> rows;
  std::vector<Aggregate> aggregates;
};

// zCDP budget used by the DPGD baseline and LocDpgd.
double ExperimentRho(const ExperimentConfig& cfg);

// T = max(1, round(n^2 rho / (128 d))), i.e. sqrt(2 / T) = 16 sqrt(d) /
// (n sqrt(rho)).
int BaselineDpgdSteps(int n, int d, double rho);

absl::StatusOr<RunReport> RunExperiment(const ExperimentConfig& cfg);

std::vector<Aggregate> Aggregates(const std::vector<RunRow>& rows);

std::string ReportCsv(const RunReport& report);
std::string ReportJson(const RunReport& report);

// Writes CSV or JSON to `path`; Unavailable on I/O failure.
absl::Status EmitReport(const RunReport& report, ReportFormat format,
                        const std::string& path);

// Parses a JSON config mirroring the CLI flags.
absl::StatusOr<ExperimentConfig> ParseExperimentConfigJson(
    const std::string& text, ExperimentConfig base = {});

}  // namespace dpgm

#endif  // DPGM_BENCH_H_
