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

#ifndef DPGM_DPGD_H_
#define DPGM_DPGD_H_

#include <functional>

#include "absl/status/statusor.h"
#include "dpgm/geometry.h"
#include "dpgm/privacy.h"
#include "dpgm/radius_finder.h"

namespace dpgm {

// Feasible set outer ∩ inner; outer is the a-priori ball B(0, R).
struct FeasibleSet {
  Ball outer;
  Ball inner;
};

struct DpgdOptions {
  // The mean gradient has replacement sensitivity 2/n. The default noise
  // sigma^2 = T / (2 rho n^2) is calibrated to sensitivity 1/n; setting this
  // doubles sigma.
  bool conservative_noise = false;
  double projection_tol = 1e-9;
  // Called with every iterate theta_2..theta_{T+1} that enters the average.
  std::function<void(const Vector&)> on_iterate;
};

// Per-step noise standard deviation for T steps under rho-zCDP.
double DpgdSigma(const ZcdpBudget& budget, int n, int steps,
                 bool conservative = false);

// Projected noisy gradient descent on F / n:
//   theta_{t+1} = Proj(theta_t - eta (grad F(theta_t) / n + xi_t)),
// xi_t ~ N(0, sigma^2 I), theta_1 = init, for t = 1..T; returns the average
// of the T post-step iterates theta_2..theta_{T+1}.
absl::StatusOr<Vector> Dpgd(const Vector& init, const Dataset& data,
                            const ZcdpBudget& budget,
                            const FeasibleSet& feasible, double eta, int steps,
                            Rng& rng, const DpgdOptions& options = {});

struct LocalizationOptions {
  int warmup_steps = 500;
  DpgdOptions dpgd;
  // Optional precomputed pairwise distances for the radius finder.
  const SortedNeighborDistances* distances = nullptr;
  // Called after every warm-up round with (round, theta_{t+1}, rad_t).
  std::function<void(int, const Vector&, double)> on_round;
};

struct LocalizationResult {
  Vector theta0;
  double delta_hat = 0.0;
  // B(theta0, 25 * delta_hat).
  Ball localized;
  int rounds = 0;
  bool failed = false;
  BudgetLedger ledger;
};

// Warm-up rounds k = ceil(log2(R / delta_hat)), clamped at zero.
int WarmupRounds(double R, double delta_hat);

// rad_m = R / 2^m + 12 delta_hat * sum_{i<m} 2^-i.
double WarmupRadius(double R, double delta_hat, int round);

// Radius finder at gamma = 3/4 with (rho / 2, beta / 2), then k rounds of
// Dpgd over B(0, R) ∩ B(theta_t, rad_t), each with rho / (2k), step size
// rad_t sqrt(2 d k / (3 rho n^2)), and rad_{t+1} = rad_t / 2 + 12 delta_hat.
absl::StatusOr<LocalizationResult> Localization(
    const Dataset& data, const ZcdpBudget& budget, double r, double beta,
    double R, Rng& rng, const LocalizationOptions& options = {});

struct LocDpgdResult {
  Vector theta;
  bool failed = false;
  LocalizationResult localization;
  int finetune_steps = 0;
  double finetune_eta = 0.0;
  BudgetLedger ledger;
};

// max(1, floor(n^2 rho / (256 d))).
int FinetuneSteps(int n, int d, double rho);

// Localization with (rho / 2, beta / 2) followed by Dpgd with rho / 2 over
// B(0, R) ∩ B(theta0, 25 delta_hat), eta = 50 delta_hat sqrt(d / (6 rho n^2)).
// On localization failure returns failed = true and theta = 0.
absl::StatusOr<LocDpgdResult> LocDpgd(const Dataset& data,
                                      const ZcdpBudget& budget, double r,
                                      double beta, double R, Rng& rng,
                                      const LocalizationOptions& options = {});

}  // namespace dpgm

#endif  // DPGM_DPGD_H_
