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

#include "dpgm/dpgd.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "test_util.h"

namespace dpgm {
namespace {

using test::Rows;
using test::Vec;

FeasibleSet Huge(int d) {
  Ball b{Vector::Zero(d), 1e6};
  return {b, b};
}

TEST(DpgdTest, SinglePointFlow) {
  testing::ScopedNoiseDisabled off;
  Rng rng(0);
  Vector out = *Dpgd(Vec({0, 0}), Rows({{5, 0}}), {1.0}, Huge(2), 0.5, 50, rng);
  EXPECT_LE((out - Vec({5, 0})).norm(), 0.5);
}

TEST(DpgdTest, MedianAttraction) {
  testing::ScopedNoiseDisabled off;
  Rng rng(0);
  const double eta = 0.1;
  Vector out =
      *Dpgd(Vec({3.05}), Rows({{1}, {2}, {3}, {4}, {5}}), {1.0}, Huge(1), eta, 400, rng);
  EXPECT_LE(std::abs(out[0] - 3.0), 2 * eta);
  Rng rng2(0);
  Vector far =
      *Dpgd(Vec({-20}), Rows({{1}, {2}, {3}, {4}, {5}}), {1.0}, Huge(1), eta, 4000, rng2);
  EXPECT_LE(std::abs(far[0] - 3.0), 2 * eta + 0.5);
}

TEST(DpgdTest, SeededDeterminism) {
  std::mt19937_64 gen(2);
  Dataset data = test::GaussianData(30, 3, 1.0, gen);
  Rng a(7), b(7);
  Vector x = *Dpgd(Vector::Zero(3), data, {0.5}, Huge(3), 0.1, 20, a);
  Vector y = *Dpgd(Vector::Zero(3), data, {0.5}, Huge(3), 0.1, 20, b);
  EXPECT_EQ(x, y);
}

TEST(DpgdTest, IteratesStayFeasible) {
  std::mt19937_64 gen(4);
  Dataset data = test::GaussianData(20, 2, 3.0, gen);
  FeasibleSet feasible{Ball{Vec({0, 0}), 2.0}, Ball{Vec({1.5, 0}), 1.0}};
  DpgdOptions options;
  int seen = 0;
  options.on_iterate = [&](const Vector& theta) {
    ++seen;
    EXPECT_TRUE(feasible.outer.Contains(theta, 1e-8));
    EXPECT_TRUE(feasible.inner.Contains(theta, 1e-8));
  };
  Rng rng(1);
  ASSERT_TRUE(Dpgd(Vec({1.0, 0}), data, {0.01}, feasible, 1.0, 100, rng, options).ok());
  EXPECT_EQ(seen, 100);
}

TEST(DpgdTest, RejectsBadInput) {
  Dataset data = Rows({{0, 0}, {1, 1}});
  Rng rng(0);
  EXPECT_FALSE(Dpgd(Vec({0, 0}), data, {0.0}, Huge(2), 0.1, 5, rng).ok());
  EXPECT_FALSE(Dpgd(Vec({0, 0}), data, {1.0}, Huge(2), 0.0, 5, rng).ok());
  EXPECT_FALSE(Dpgd(Vec({0, 0}), data, {1.0}, Huge(2), 0.1, 0, rng).ok());
  EXPECT_FALSE(Dpgd(Vec({0}), data, {1.0}, Huge(2), 0.1, 5, rng).ok());
  FeasibleSet small{Ball{Vec({0, 0}), 1}, Ball{Vec({0, 0}), 1}};
  EXPECT_EQ(Dpgd(Vec({3, 0}), data, {1.0}, small, 0.1, 5, rng).status().code(),
            absl::StatusCode::kInvalidArgument);
  FeasibleSet disjoint{Ball{Vec({0, 0}), 1}, Ball{Vec({5, 0}), 1}};
  EXPECT_FALSE(Dpgd(Vec({1, 0}), data, {1.0}, disjoint, 0.1, 5, rng).ok());
}

TEST(DpgdTest, SigmaCalibration) {
  EXPECT_NEAR(DpgdSigma({0.5}, 100, 50, false), std::sqrt(50.0 / (2 * 0.5 * 1e4)), 1e-15);
  EXPECT_NEAR(DpgdSigma({0.5}, 100, 50, true), 2 * std::sqrt(50.0 / (2 * 0.5 * 1e4)),
              1e-15);
}

TEST(WarmupTest, RoundsAndRadiusRecursion) {
  EXPECT_EQ(WarmupRounds(100, 100), 0);
  EXPECT_EQ(WarmupRounds(100, 200), 0);
  EXPECT_EQ(WarmupRounds(100, 0.05 * 8), 8);  // log2(250) = 7.97
  EXPECT_EQ(WarmupRounds(100, 0.05 * 2048), 0);
  for (double dh : {0.05, 0.4, 3.2, 25.6}) {
    const int k = WarmupRounds(100, dh);
    for (int m = 0; m <= k; ++m) {
      const double closed = 100 / std::ldexp(1.0, m) + 12 * dh * 2 * (1 - std::ldexp(1.0, -m));
      EXPECT_NEAR(WarmupRadius(100, dh, m), closed, 1e-9);
    }
    EXPECT_LE(WarmupRadius(100, dh, k), 25 * dh + 1e-12);
  }
}

TEST(FinetuneTest, Steps) {
  EXPECT_EQ(FinetuneSteps(1000, 10, 1.0), 390);
  EXPECT_EQ(FinetuneSteps(10, 10, 0.01), 1);
}

Dataset PlantedNinetyTen(std::mt19937_64& gen) {
  const int d = 3;
  Vector mu = Vec({50, 0, 0});
  Eigen::MatrixXd m(d, 400);
  for (int i = 0; i < 360; ++i) {
    Vector u = test::GaussianPoint(d, 1.0, gen).normalized();
    m.col(i) = mu + 0.05 * u;
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 360; i < 400; ++i) {
    Vector u = test::GaussianPoint(d, 1.0, gen).normalized();
    m.col(i) = u * 100 * std::cbrt(unif(gen));
  }
  return *Dataset::FromMatrix(m);
}

TEST(LocalizationTest, NoiseDisabledContainsOracle) {
  testing::ScopedNoiseDisabled off;
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 5; ++trial) {
    Dataset data = PlantedNinetyTen(gen);
    Vector oracle = *WeiszfeldGm(data);
    Rng rng(trial);
    LocalizationResult loc = *Localization(data, {10.0}, 0.05, 0.1, 100, rng);
    ASSERT_FALSE(loc.failed);
    EXPECT_DOUBLE_EQ(loc.localized.radius, 25 * loc.delta_hat);
    EXPECT_TRUE(loc.localized.Contains(oracle)) << (loc.theta0 - oracle).norm();
    EXPECT_NEAR(loc.ledger.Total(), 10.0, 1e-12);
  }
}

TEST(LocalizationTest, DegenerateRadiusGivesOrigin) {
  testing::ScopedNoiseDisabled off;
  // Two far clusters keep the estimate at the top of the grid.
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 50; ++i) rows.push_back({-1.0, 0});
  for (int i = 0; i < 50; ++i) rows.push_back({1.0, 0});
  Rng rng(0);
  LocalizationResult loc = *Localization(Rows(rows), {100.0}, 0.5, 0.1, 1.0, rng);
  ASSERT_FALSE(loc.failed);
  EXPECT_GE(loc.delta_hat, 1.0);
  EXPECT_EQ(loc.rounds, 0);
  EXPECT_TRUE(loc.theta0.isZero());
  EXPECT_NEAR(loc.ledger.Total(), 100.0, 1e-12);
}

TEST(LocalizationTest, RoundRadiiFollowRecursion) {
  testing::ScopedNoiseDisabled off;
  std::mt19937_64 gen(10);
  Dataset data = PlantedNinetyTen(gen);
  LocalizationOptions options;
  std::vector<double> radii;
  options.on_round = [&](int, const Vector&, double rad) { radii.push_back(rad); };
  Rng rng(3);
  LocalizationResult loc = *Localization(data, {10.0}, 0.05, 0.1, 100, rng, options);
  ASSERT_EQ(static_cast<int>(radii.size()), loc.rounds);
  for (int t = 0; t < loc.rounds; ++t) {
    EXPECT_NEAR(radii[t], WarmupRadius(100, loc.delta_hat, t), 1e-9);
  }
}

TEST(LocalizationTest, FailureIsAValue) {
  Rng rng(0);
  LocalizationResult loc =
      *Localization(Rows({{-1, 0}, {1, 0}, {0, 1}}), {0.01}, 0.05, 0.1, 10, rng);
  EXPECT_TRUE(loc.failed);
  EXPECT_NEAR(loc.ledger.Total(), 0.01, 1e-15);
}

TEST(LocDpgdTest, NoiseDisabledEndToEnd) {
  testing::ScopedNoiseDisabled off;
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 3; ++trial) {
    Dataset data = PlantedNinetyTen(gen);
    const double oracle = GmObjectiveUnchecked(*WeiszfeldGm(data), data);
    Rng rng(trial);
    LocDpgdResult result = *LocDpgd(data, {10.0}, 0.05, 0.1, 100, rng);
    ASSERT_FALSE(result.failed);
    EXPECT_LE(GmObjectiveUnchecked(result.theta, data) / oracle, 1.01);
    EXPECT_NEAR(result.ledger.Total(), 10.0, 1e-12);
  }
}

TEST(LocDpgdTest, BudgetTraceAndDeterminism) {
  std::mt19937_64 gen(13);
  Dataset data = PlantedNinetyTen(gen);
  Rng a(5), b(5);
  LocDpgdResult x = *LocDpgd(data, {2.0}, 0.05, 0.1, 100, a);
  LocDpgdResult y = *LocDpgd(data, {2.0}, 0.05, 0.1, 100, b);
  EXPECT_EQ(x.theta, y.theta);
  EXPECT_EQ(x.failed, y.failed);
  EXPECT_NEAR(x.ledger.Total(), 2.0, 1e-12);
  std::vector<ZcdpBudget> parts;
  for (const BudgetEntry& e : x.ledger.entries()) parts.push_back({e.rho});
  EXPECT_NEAR(ComposeZcdp(parts)->rho, 2.0, 1e-12);
}

TEST(LocDpgdTest, SmallSampleStillRuns) {
  Rng rng(1);
  auto result = LocDpgd(Rows({{1, 2}, {3, 4}, {5, 6}}), {0.1}, 0.05, 0.1, 10, rng);
  ASSERT_TRUE(result.ok());
  EXPECT_EQ(result->theta.size(), 2);
}

TEST(LocDpgdTest, RatioImprovesWithSampleSize) {
  // Spread-out cluster so no point has 3n/4 neighbours within r.
  const int d = 2;
  const double rho = 2.0;
  std::vector<double> medians;
  for (int n : {500, 1000, 2000}) {
    std::vector<double> ratios;
    for (int trial = 0; trial < 50; ++trial) {
      std::mt19937_64 gen(1000 * n + trial);
      Dataset data = test::PlantedCluster(n * 9 / 10, n - n * 9 / 10, Vec({30, 0}), 1.0,
                                          90.0, gen);
      const double oracle = GmObjectiveUnchecked(*WeiszfeldGm(data, 1e-8), data);
      Rng rng = Rng(77).Fork("trial", trial);
      LocDpgdResult result = *LocDpgd(data, {rho}, 0.05, 0.1, 100, rng);
      ratios.push_back(GmObjectiveUnchecked(result.theta, data) / oracle);
    }
    std::nth_element(ratios.begin(), ratios.begin() + 25, ratios.end());
    medians.push_back(ratios[25]);
    EXPECT_TRUE(std::isfinite(medians.back()));
  }
  EXPECT_GT(medians[0], medians[1]);
  EXPECT_GT(medians[1], medians[2]);
}

}  // namespace
}  // namespace dpgm
