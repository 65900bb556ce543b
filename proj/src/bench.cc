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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <thread>

#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "dpgm/cutting_plane.h"
#include "dpgm/dpgd.h"
#include "dpgm/inverse_sensitivity.h"
#include "json.hpp"

namespace dpgm {
namespace {

using json = nlohmann::ordered_json;

// Rounds to 12 significant digits so JSON and CSV agree.
double Sig12(double v) {
  if (!std::isfinite(v)) return v;
  return std::stod(absl::StrFormat("%.12g", v));
}

Vector UniformInBall(int d, double radius, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector direction(d);
  for (int j = 0; j < d; ++j) direction[j] = normal(rng);
  return direction.normalized() *
         (radius * std::pow(rng.UniformOpen(), 1.0 / d));
}

struct AlgorithmOutcome {
  Vector theta;
  bool failed = false;
  BudgetLedger ledger;
  double budget_rho = 0.0;
};

absl::StatusOr<AlgorithmOutcome> RunAlgorithm(Algorithm algorithm,
                                              const Dataset& data,
                                              const ExperimentConfig& cfg,
                                              double R, Rng& rng) {
  const int n = data.n();
  const int d = data.d();
  AlgorithmOutcome out;
  switch (algorithm) {
    case Algorithm::kDpgdBaseline: {
      const double rho = ExperimentRho(cfg);
      const int steps = BaselineDpgdSteps(n, d, rho);
      const double eta = 2.0 * R * std::sqrt(d / (12.0 * rho * n * n));
      const Ball ball{Vector::Zero(d), R};
      absl::StatusOr<Vector> theta = Dpgd(Vector::Zero(d), data, ZcdpBudget{rho},
                                          FeasibleSet{ball, ball}, eta, steps, rng);
      if (!theta.ok()) return theta.status();
      out.theta = *std::move(theta);
      out.ledger.Record("dpgd", rho);
      out.budget_rho = rho;
      return out;
    }
    case Algorithm::kLocDpgd: {
      const double rho = ExperimentRho(cfg);
      absl::StatusOr<LocDpgdResult> result =
          LocDpgd(data, ZcdpBudget{rho}, cfg.r, cfg.beta, R, rng);
      if (!result.ok()) return result.status();
      out.theta = result->theta;
      out.failed = result->failed;
      out.ledger = result->ledger;
      out.budget_rho = rho;
      return out;
    }
    case Algorithm::kLocCuttingPlane: {
      CuttingPlaneConfig cp;
      cp.budget = ApproxDpBudget{*cfg.epsilon, *cfg.delta};
      absl::StatusOr<CuttingPlaneResult> result =
          LocDpCuttingPlane(data, cp, cfg.r, cfg.beta, R, rng);
      if (!result.ok()) return result.status();
      out.theta = result->theta;
      out.failed = result->failed;
      out.ledger = result->ledger;
      out.budget_rho = CuttingPlaneRho(cp.budget).rho;
      return out;
    }
    case Algorithm::kSinvs: {
      GridSpec grid{R, cfg.r, d};
      absl::StatusOr<SinvsResult> result =
          SinvsSample(data, *cfg.epsilon, cfg.r, R, grid, rng);
      if (!result.ok()) return result.status();
      out.theta = result->theta;
      return out;
    }
  }
  return absl::InternalError("Unknown algorithm.");
}

}  // namespace

absl::StatusOr<Dataset> GenerateSynthetic(int n, int d, Rng& rng) {
  if (n < 10) return absl::InvalidArgumentError("n must be at least 10.");
  if (d < 1) return absl::InvalidArgumentError("d must be positive.");
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector mu(d);
  for (int j = 0; j < d; ++j) mu[j] = normal(rng);
  mu = 50.0 * mu.normalized();

  const int cluster = static_cast<int>(std::floor(0.9 * n));
  Eigen::MatrixXd points(d, n);
  for (int i = 0; i < cluster; ++i) {
    for (int j = 0; j < d; ++j) points(j, i) = mu[j] + 0.01 * normal(rng);
  }
  for (int i = cluster; i < n; ++i) points.col(i) = UniformInBall(d, 100.0, rng);
  return Dataset::FromMatrix(std::move(points));
}

std::string AlgorithmName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kDpgdBaseline:
      return "dpgd-baseline";
    case Algorithm::kLocDpgd:
      return "loc-dpgd";
    case Algorithm::kLocCuttingPlane:
      return "loc-cutting-plane";
    case Algorithm::kSinvs:
      return "sinvs";
  }
  return "unknown";
}

absl::StatusOr<Algorithm> ParseAlgorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::kDpgdBaseline, Algorithm::kLocDpgd,
                      Algorithm::kLocCuttingPlane, Algorithm::kSinvs}) {
    if (AlgorithmName(a) == name) return a;
  }
  return absl::InvalidArgumentError(absl::StrFormat(
      "Unknown algorithm '%s'; expected one of dpgd-baseline, loc-dpgd, "
      "loc-cutting-plane, sinvs.",
      name));
}

absl::Status ExperimentConfig::Validate() const {
  if (data_path.empty()) {
    if (n < 10) return absl::InvalidArgumentError("--n must be at least 10.");
    if (d < 1) return absl::InvalidArgumentError("--d must be positive.");
  }
  if (sweep_R.empty()) {
    return absl::InvalidArgumentError("--sweep-R needs at least one value.");
  }
  for (double R : sweep_R) {
    if (!(R > 0.0) || !std::isfinite(R)) {
      return absl::InvalidArgumentError("Every R must be finite and positive.");
    }
    if (!(r < R)) {
      return absl::InvalidArgumentError("--r must be below every swept R.");
    }
  }
  if (!(r > 0.0)) return absl::InvalidArgumentError("--r must be positive.");
  if (!(beta > 0.0 && beta < 1.0)) {
    return absl::InvalidArgumentError("--beta must lie in (0, 1).");
  }
  if (reps < 1) return absl::InvalidArgumentError("--reps must be >= 1.");
  if (algorithms.empty()) {
    return absl::InvalidArgumentError("--algos must name an algorithm.");
  }
  if (threads < 0) return absl::InvalidArgumentError("threads must be >= 0.");
  if (rho && !(*rho > 0.0 && std::isfinite(*rho))) {
    return absl::InvalidArgumentError("--rho must be finite and positive.");
  }
  if (epsilon && !(*epsilon > 0.0 && std::isfinite(*epsilon))) {
    return absl::InvalidArgumentError("--eps must be finite and positive.");
  }
  if (delta && !(*delta > 0.0 && *delta < 1.0)) {
    return absl::InvalidArgumentError("--delta must lie in (0, 1).");
  }
  for (Algorithm a : algorithms) {
    const bool zcdp = a == Algorithm::kDpgdBaseline || a == Algorithm::kLocDpgd;
    if (zcdp && !rho && !(epsilon && delta)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("%s needs --rho or both --eps and --delta.",
                          AlgorithmName(a)));
    }
    if (a == Algorithm::kLocCuttingPlane && !(epsilon && delta)) {
      return absl::InvalidArgumentError(
          "loc-cutting-plane needs --eps and --delta.");
    }
    if (a == Algorithm::kSinvs) {
      if (!epsilon) return absl::InvalidArgumentError("sinvs needs --eps.");
      if (data_path.empty() && d > 2) {
        return absl::InvalidArgumentError("sinvs supports d <= 2 only.");
      }
    }
  }
  return absl::OkStatus();
}

double ExperimentRho(const ExperimentConfig& cfg) {
  if (cfg.rho) return *cfg.rho;
  return ZcdpFromApproxDp(ApproxDpBudget{*cfg.epsilon, *cfg.delta}).rho;
}

int BaselineDpgdSteps(int n, int d, double rho) {
  const double steps = std::round(static_cast<double>(n) * n * rho / (128.0 * d));
  return static_cast<int>(std::clamp(steps, 1.0, 1e9));
}

absl::StatusOr<RunReport> RunExperiment(const ExperimentConfig& cfg) {
  if (auto status = cfg.Validate(); !status.ok()) return status;

  std::optional<Dataset> fixed;
  if (!cfg.data_path.empty()) {
    absl::StatusOr<Dataset> loaded = LoadDatasetCsv(cfg.data_path);
    if (!loaded.ok()) return loaded.status();
    for (Algorithm a : cfg.algorithms) {
      if (a == Algorithm::kSinvs && loaded->d() > 2) {
        return absl::InvalidArgumentError("sinvs supports d <= 2 only.");
      }
    }
    fixed = *std::move(loaded);
  }

  const Rng root(cfg.seed);
  const size_t per_rep = cfg.sweep_R.size() * cfg.algorithms.size();
  std::vector<RunRow> rows(per_rep * cfg.reps);
  std::vector<absl::Status> statuses(cfg.reps);

  auto run_rep = [&](int rep) -> absl::Status {
    Dataset data = fixed ? *fixed : [&]() {
      Rng data_rng = root.Fork("data", rep);
      return *GenerateSynthetic(cfg.n, cfg.d, data_rng);
    }();
    WeiszfeldResult oracle = RunWeiszfeld(data, 1e-8, 100000);
    const double oracle_objective = GmObjectiveUnchecked(oracle.theta, data);
    size_t slot = per_rep * rep;
    for (size_t ri = 0; ri < cfg.sweep_R.size(); ++ri) {
      const double R = cfg.sweep_R[ri];
      for (Algorithm algorithm : cfg.algorithms) {
        Rng rng = root.Fork(AlgorithmName(algorithm), rep).Fork("R", ri);
        const auto start = std::chrono::steady_clock::now();
        absl::StatusOr<AlgorithmOutcome> outcome =
            RunAlgorithm(algorithm, data, cfg, R, rng);
        const auto stop = std::chrono::steady_clock::now();
        if (!outcome.ok()) return outcome.status();
        RunRow& row = rows[slot++];
        row.algorithm = algorithm;
        row.R = R;
        row.rep = rep;
        row.objective = GmObjectiveUnchecked(outcome->theta, data);
        row.oracle_objective = oracle_objective;
        row.ratio = oracle_objective > 0.0 ? row.objective / oracle_objective
                                           : (row.objective > 0.0 ? INFINITY : 1.0);
        row.wall_ms =
            cfg.record_timing
                ? std::chrono::duration<double, std::milli>(stop - start).count()
                : 0.0;
        row.failed = outcome->failed;
        row.seed = cfg.seed;
        row.ledger = std::move(outcome->ledger);
        row.budget_rho = outcome->budget_rho;
      }
    }
    return absl::OkStatus();
  };

  int threads = cfg.threads > 0
                    ? cfg.threads
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, cfg.reps);
  if (threads <= 1) {
    for (int rep = 0; rep < cfg.reps; ++rep) statuses[rep] = run_rep(rep);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    for (int w = 0; w < threads; ++w) {
      workers.emplace_back([&]() {
        for (int rep = next++; rep < cfg.reps; rep = next++) {
          statuses[rep] = run_rep(rep);
        }
      });
    }
    for (std::thread& t : workers) t.join();
  }
  for (const absl::Status& status : statuses) {
    if (!status.ok()) return status;
  }

  RunReport report;
  report.config = cfg;
  report.rows = std::move(rows);
  report.aggregates = Aggregates(report.rows);
  return report;
}

std::vector<Aggregate> Aggregates(const std::vector<RunRow>& rows) {
  // Keyed by first appearance to keep the row order.
  std::vector<Aggregate> out;
  std::vector<std::vector<double>> ratios;
  for (const RunRow& row : rows) {
    size_t k = 0;
    while (k < out.size() &&
           !(out[k].algorithm == row.algorithm && out[k].R == row.R)) {
      ++k;
    }
    if (k == out.size()) {
      out.push_back(Aggregate{row.algorithm, row.R});
      ratios.emplace_back();
    }
    ratios[k].push_back(row.ratio);
    out[k].failures += row.failed ? 1 : 0;
    ++out[k].reps;
  }
  for (size_t k = 0; k < out.size(); ++k) {
    std::vector<double>& v = ratios[k];
    double sum = 0.0;
    for (double x : v) sum += x;
    out[k].mean_ratio = sum / v.size();
    std::sort(v.begin(), v.end());
    const size_t mid = v.size() / 2;
    out[k].median_ratio = v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  }
  return out;
}

std::string ReportCsv(const RunReport& report) {
  std::string out = "algorithm,R,rep,objective,oracle_objective,ratio,wall_ms,failed,seed\n";
  for (const RunRow& row : report.rows) {
    out += absl::StrFormat("%s,%.12g,%d,%.12g,%.12g,%.12g,%.12g,%d,%d\n",
                           AlgorithmName(row.algorithm), row.R, row.rep,
                           row.objective, row.oracle_objective, row.ratio,
                           row.wall_ms, row.failed ? 1 : 0, row.seed);
  }
  return out;
}

std::string ReportJson(const RunReport& report) {
  const ExperimentConfig& cfg = report.config;
  json config;
  config["n"] = cfg.n;
  config["d"] = cfg.d;
  config["sweep_R"] = json::array();
  for (double R : cfg.sweep_R) config["sweep_R"].push_back(Sig12(R));
  config["r"] = Sig12(cfg.r);
  config["eps"] = cfg.epsilon ? json(Sig12(*cfg.epsilon)) : json(nullptr);
  config["delta"] = cfg.delta ? json(Sig12(*cfg.delta)) : json(nullptr);
  config["rho"] = cfg.rho ? json(Sig12(*cfg.rho)) : json(nullptr);
  config["beta"] = Sig12(cfg.beta);
  config["reps"] = cfg.reps;
  config["algos"] = json::array();
  for (Algorithm a : cfg.algorithms) config["algos"].push_back(AlgorithmName(a));
  config["seed"] = cfg.seed;
  config["data"] = cfg.data_path.empty() ? json(nullptr) : json(cfg.data_path);

  json rows = json::array();
  for (const RunRow& row : report.rows) {
    json trace = json::array();
    for (const BudgetEntry& e : row.ledger.entries()) {
      trace.push_back({{"stage", e.stage}, {"rho", Sig12(e.rho)}, {"spent", e.spent}});
    }
    rows.push_back({{"algorithm", AlgorithmName(row.algorithm)},
                    {"R", Sig12(row.R)},
                    {"rep", row.rep},
                    {"objective", Sig12(row.objective)},
                    {"oracle_objective", Sig12(row.oracle_objective)},
                    {"ratio", Sig12(row.ratio)},
                    {"wall_ms", Sig12(row.wall_ms)},
                    {"failed", row.failed},
                    {"seed", row.seed},
                    {"budget_rho", Sig12(row.budget_rho)},
                    {"budget_trace", std::move(trace)}});
  }
  json aggregates = json::array();
  for (const Aggregate& a : report.aggregates) {
    aggregates.push_back({{"algorithm", AlgorithmName(a.algorithm)},
                          {"R", Sig12(a.R)},
                          {"mean_ratio", Sig12(a.mean_ratio)},
                          {"median_ratio", Sig12(a.median_ratio)},
                          {"failures", a.failures},
                          {"reps", a.reps}});
  }
  json doc;
  doc["library"] = "dpgm";
  doc["version"] = DPGM_VERSION;
  doc["config"] = std::move(config);
  doc["rows"] = std::move(rows);
  doc["aggregates"] = std::move(aggregates);
  return doc.dump(2) + "\n";
}

absl::Status EmitReport(const RunReport& report, ReportFormat format,
                        const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    return absl::UnavailableError(absl::StrFormat("Cannot open %s for writing.", path));
  }
  out << (format == ReportFormat::kCsv ? ReportCsv(report) : ReportJson(report));
  out.flush();
  if (!out) return absl::UnavailableError(absl::StrFormat("Write to %s failed.", path));
  return absl::OkStatus();
}

absl::StatusOr<ExperimentConfig> ParseExperimentConfigJson(
    const std::string& text, ExperimentConfig base) {
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    return absl::InvalidArgumentError("Config is not a JSON object.");
  }
  try {
    for (auto& [key, value] : doc.items()) {
      if (key == "n") {
        base.n = value.get<int>();
      } else if (key == "d") {
        base.d = value.get<int>();
      } else if (key == "sweep_R") {
        base.sweep_R = value.get<std::vector<double>>();
      } else if (key == "r") {
        base.r = value.get<double>();
      } else if (key == "eps") {
        base.epsilon = value.is_null() ? std::nullopt
                                       : std::optional<double>(value.get<double>());
      } else if (key == "delta") {
        base.delta = value.is_null() ? std::nullopt
                                     : std::optional<double>(value.get<double>());
      } else if (key == "rho") {
        base.rho = value.is_null() ? std::nullopt
                                   : std::optional<double>(value.get<double>());
      } else if (key == "beta") {
        base.beta = value.get<double>();
      } else if (key == "reps") {
        base.reps = value.get<int>();
      } else if (key == "algos") {
        base.algorithms.clear();
        for (const auto& name : value) {
          absl::StatusOr<Algorithm> a = ParseAlgorithm(name.get<std::string>());
          if (!a.ok()) return a.status();
          base.algorithms.push_back(*a);
        }
      } else if (key == "seed") {
        base.seed = value.get<uint64_t>();
      } else if (key == "out") {
        base.output_path = value.get<std::string>();
      } else if (key == "format") {
        const std::string f = value.get<std::string>();
        if (f == "csv") {
          base.format = ReportFormat::kCsv;
        } else if (f == "json") {
          base.format = ReportFormat::kJson;
        } else {
          return absl::InvalidArgumentError("format must be csv or json.");
        }
      } else if (key == "data") {
        base.data_path = value.is_null() ? "" : value.get<std::string>();
      } else if (key == "threads") {
        base.threads = value.get<int>();
      } else {
        return absl::InvalidArgumentError(
            absl::StrFormat("Unknown config key '%s'.", key));
      }
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrFormat("Bad config value: %s", e.what()));
  }
  return base;
}

}  // namespace dpgm
