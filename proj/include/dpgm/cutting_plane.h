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

#ifndef DPGM_CUTTING_PLANE_H_
#define DPGM_CUTTING_PLANE_H_

#include <optional>
#include <vector>

#include "absl/status/statusor.h"
#include "dpgm/dpgd.h"
#include "dpgm/geometry.h"
#include "dpgm/privacy.h"

namespace dpgm {

// {theta : <normal, theta> < offset}.
struct Halfspace {
  Vector normal;
  double offset = 0.0;

  double Slack(const Vector& theta) const {
    return offset - normal.dot(theta);
  }
};

// The base ball intersected with every cut. `outer` is the a-priori ball
// B(0, R) and is only set when it is not redundant.
struct CutRegion {
  Ball base;
  std::optional<Ball> outer;
  std::vector<Halfspace> cuts;

  bool StrictlyContains(const Vector& theta) const;
};

// Phase I: a strictly interior point of `region`. Starts at `hint` (or the
// base centre) and bisects the step along the average inward normal of the
// constraints it violates. Returns FailedPrecondition if none is found.
absl::StatusOr<Vector> StrictlyFeasiblePoint(
    const CutRegion& region, const std::optional<Vector>& hint = std::nullopt);

// Minimizer of the log barrier
//   -sum_j log(offset_j - <normal_j, theta>) - log(rad^2 - ||theta - c||^2)
// (plus the outer-ball term when present), by damped Newton with
// backtracking, at most 100 steps. Stops once the gradient norm is at most
// tol or the Newton decrement vanishes to rounding. FailedPrecondition when
// the region has empty interior.
absl::StatusOr<Vector> AnalyticCentre(
    const CutRegion& region, double tol = 1e-8,
    const std::optional<Vector>& hint = std::nullopt);

// Monte Carlo estimate of vol(region ∩ cut) / vol(region) by rejection
// sampling from the base ball. Requires d <= 6.
absl::StatusOr<double> EstimateVolumeFraction(const CutRegion& region,
                                              const Halfspace& cut,
                                              int samples, Rng& rng);

// Samples t with probability proportional to exp(-epsilon F(theta_t) / scale).
absl::StatusOr<int> ExpMechSelect(const std::vector<Vector>& candidates,
                                  const Dataset& data, double epsilon,
                                  double scale, Rng& rng);

struct CuttingPlaneConfig {
  ApproxDpBudget budget;
  // Assumed per-cut volume reduction.
  double tau = 0.25;
  // Constant in k_ft = c (d / tau) ln(n sqrt(tau rho) / sqrt(d) + sqrt(d)).
  double c_kft = 4.0;
  // Overrides the formula when positive.
  int k_ft = 0;
  double centre_tol = 1e-8;
  // The summed gradient has replacement sensitivity 2; the default noise
  // variance k_ft / rho matches sensitivity 1. Setting this doubles sigma.
  bool conservative_noise = false;

  absl::Status Validate() const;
};

// rho = eps^2 / (16 ln(2/delta) + 8 eps), i.e. ZcdpFromApproxDp(eps/2, delta/2).
ZcdpBudget CuttingPlaneRho(const ApproxDpBudget& budget);

int CuttingPlaneIterations(const CuttingPlaneConfig& cfg, int n, int d,
                           double rho);

struct CuttingPlaneTrace {
  std::vector<Vector> iterates;
  std::vector<Halfspace> cuts;
  // True when the loop stopped before k_ft iterations.
  bool stopped_early = false;
};

// The fine-tuning loop on a fixed starting region: k_ft centres, each cut by
// the halfspace <grad F(theta_t) + xi_t, theta - theta_t> < 0 with
// xi_t ~ N(0, (k_ft / rho) I). Stops early if the region loses its interior
// or a noiseless gradient vanishes.
absl::StatusOr<CuttingPlaneTrace> RunCuttingPlane(const Dataset& data,
                                                  CutRegion region, int k_ft,
                                                  const ZcdpBudget& budget,
                                                  Rng& rng,
                                                  double centre_tol = 1e-8,
                                                  bool conservative = false);

struct CuttingPlaneResult {
  Vector theta;
  int selected = -1;
  bool failed = false;
  int k_ft = 0;
  LocalizationResult localization;
  CuttingPlaneTrace trace;
  BudgetLedger ledger;
};

// Localization with (rho / 2, r, min(beta / 3, delta / 2)), the cutting-plane
// loop over B(0, R) ∩ B(theta0, 25 delta_hat), then exponential-mechanism
// selection with scale 448 delta_hat.
absl::StatusOr<CuttingPlaneResult> LocDpCuttingPlane(
    const Dataset& data, const CuttingPlaneConfig& cfg, double r, double beta,
    double R, Rng& rng, const LocalizationOptions& options = {});

}  // namespace dpgm

#endif  // DPGM_CUTTING_PLANE_H_
